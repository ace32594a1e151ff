#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pairsim {

/// Dense row-major matrix of doubles. Sized k x k for pair-type states and
/// rates, or k^2 x k^2 for Jacobians and covariance blocks; k stays small.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols),
        d_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), value) {}

  static Mat square(int k, double value = 0.0) { return Mat(k, k, value); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return d_[idx(i, j)]; }
  double operator()(int i, int j) const { return d_[idx(i, j)]; }

  double row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }

  double col_sum(int j) const {
    double s = 0.0;
    for (int i = 0; i < rows_; ++i) s += (*this)(i, j);
    return s;
  }

  double total() const {
    double s = 0.0;
    for (double v : d_) s += v;
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, std::abs(v));
    return m;
  }

  double min_value() const {
    double m = d_.empty() ? 0.0 : d_[0];
    for (double v : d_) m = std::min(m, v);
    return m;
  }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  Mat& operator+=(const Mat& o) {
    assert(same_shape(o));
    for (std::size_t n = 0; n < d_.size(); ++n) d_[n] += o.d_[n];
    return *this;
  }

  Mat& operator-=(const Mat& o) {
    assert(same_shape(o));
    for (std::size_t n = 0; n < d_.size(); ++n) d_[n] -= o.d_[n];
    return *this;
  }

  Mat& operator*=(double s) {
    for (double& v : d_) v *= s;
    return *this;
  }

  const std::vector<double>& data() const { return d_; }
  std::vector<double>& data() { return d_; }

 private:
  std::size_t idx(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
  }

  int rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

inline double max_abs_diff(const Mat& a, const Mat& b) {
  assert(a.same_shape(b));
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace pairsim
