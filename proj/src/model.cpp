#include "pairsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pairsim/errors.hpp"

namespace pairsim {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + " has a non-finite entry");
}

}  // namespace

ModelParams build_params(const std::vector<double>& alpha, const std::vector<double>& beta,
                         const Mat& p) {
  const int k = static_cast<int>(alpha.size());
  if (k == 0) throw DimensionMismatch("alpha is empty");
  if (static_cast<int>(beta.size()) != k)
    throw DimensionMismatch("alpha and beta must have equal length");
  if (p.rows() != k || p.cols() != k) throw DimensionMismatch("p must be k x k");
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
  for (double a : alpha)
    if (a < 0.0) throw DegenerateRate("alpha entries must be >= 0");
  for (double b : beta)
    if (b < 0.0) throw DegenerateRate("beta entries must be >= 0");
  ModelParams m;
  m.k = k;
  m.alpha = alpha;
  m.beta = beta;
  m.p = p;
  m.pi = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double pij = p(i, j);
      if (!(pij > 0.0) || pij > 1.0)
        throw InvalidProbability("p entries must lie in (0, 1]");
      double rate = alpha[i] + beta[j];
      if (!(rate > 0.0))
        throw DegenerateRate("alpha_i + beta_j must be > 0 for every pair");
      m.pi(i, j) = pij * rate;
    }
  return m;
}

ModelParams params_from_pi(const Mat& pi) {
  const int k = pi.rows();
  if (k == 0 || pi.cols() != k) throw DimensionMismatch("pi must be square and nonempty");
  std::vector<double> alpha(k, 0.0), beta(k, 0.0);
  for (int j = 0; j < k; ++j) {
    double mx = 0.0;
    for (int i = 0; i < k; ++i) {
      if (!std::isfinite(pi(i, j)) || !(pi(i, j) > 0.0))
        throw DegenerateRate("pi entries must be finite and > 0");
      mx = std::max(mx, pi(i, j));
    }
    beta[j] = mx;
  }
  Mat p = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) p(i, j) = pi(i, j) / beta[j];
  ModelParams m = build_params(alpha, beta, p);
  // Rebuild pi exactly from the input to avoid round-trip rounding.
  m.pi = pi;
  return m;
}

PopulationCounts make_counts(const std::vector<long>& x, const std::vector<long>& y) {
  if (x.empty() || x.size() != y.size())
    throw DimensionMismatch("x and y must be nonempty and of equal length");
  for (long v : x)
    if (v < 0) throw InvalidPopulation("x entries must be >= 0");
  for (long v : y)
    if (v < 0) throw InvalidPopulation("y entries must be >= 0");
  long nx = std::accumulate(x.begin(), x.end(), 0L);
  long ny = std::accumulate(y.begin(), y.end(), 0L);
  if (nx != ny) throw InvalidPopulation("x and y must sum to the same n");
  if (nx == 0) throw InvalidPopulation("population must be nonempty");
  return PopulationCounts{nx, x, y};
}

PopulationFractions make_fractions(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size())
    throw DimensionMismatch("x and y must be nonempty and of equal length");
  require_finite(x, "x");
  require_finite(y, "y");
  for (double v : x)
    if (v < 0.0) throw InvalidPopulation("x entries must be >= 0");
  for (double v : y)
    if (v < 0.0) throw InvalidPopulation("y entries must be >= 0");
  double sx = std::accumulate(x.begin(), x.end(), 0.0);
  double sy = std::accumulate(y.begin(), y.end(), 0.0);
  if (std::abs(sx - 1.0) > 1e-12 || std::abs(sy - 1.0) > 1e-12)
    throw InvalidPopulation("fractions must each sum to 1");
  return PopulationFractions{x, y};
}

namespace {

std::vector<long> largest_remainder(const std::vector<double>& f, long n) {
  const int k = static_cast<int>(f.size());
  std::vector<long> out(k);
  std::vector<std::pair<double, int>> rem(k);
  long assigned = 0;
  for (int i = 0; i < k; ++i) {
    double scaled = f[i] * static_cast<double>(n);
    out[i] = static_cast<long>(std::floor(scaled));
    rem[i] = {scaled - std::floor(scaled), i};
    assigned += out[i];
  }
  long deficit = n - assigned;
  if (deficit < 0 || deficit > k)
    throw RoundingInfeasible("rounding produced an infeasible allocation");
  // Largest remainder first; ties go to the lowest index.
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (long d = 0; d < deficit; ++d) out[rem[static_cast<std::size_t>(d)].second] += 1;
  return out;
}

}  // namespace

PopulationCounts round_fractions(const PopulationFractions& fractions, long n) {
  if (n <= 0) throw InvalidPopulation("n must be positive");
  return make_counts(largest_remainder(fractions.x, n), largest_remainder(fractions.y, n));
}

std::optional<FineBalanceDecomposition> check_fine_balance(const ModelParams& params, double rtol) {
  const int k = params.k;
  const Mat& pi = params.pi;
  const double tol = rtol * pi.max_abs();
  for (int i = 0; i < k; ++i)
    for (int i2 = i + 1; i2 < k; ++i2)
      for (int j = 0; j < k; ++j)
        for (int j2 = j + 1; j2 < k; ++j2)
          if (std::abs(pi(i, j) + pi(i2, j2) - pi(i, j2) - pi(i2, j)) > tol)
            return std::nullopt;
  int istar = 0;
  for (int i = 1; i < k; ++i)
    if (pi(i, 0) < pi(istar, 0)) istar = i;
  FineBalanceDecomposition d;
  d.alpha_bar.resize(k);
  d.beta_bar.resize(k);
  for (int i = 0; i < k; ++i) d.alpha_bar[i] = pi(i, 0) - pi(istar, 0);
  for (int j = 0; j < k; ++j) d.beta_bar[j] = pi(istar, j);
  return d;
}

const char* to_string(SymCase c) {
  switch (c) {
    case SymCase::FineBalance: return "fine-balance";
    case SymCase::GammaOne: return "gamma-one";
    case SymCase::GammaZero: return "gamma-zero";
    case SymCase::Generic: return "generic";
  }
  return "?";
}

const char* to_string(MatingClass c) {
  switch (c) {
    case MatingClass::Heterogamous: return "heterogamous";
    case MatingClass::Panmictic: return "panmictic";
    case MatingClass::Homogamous: return "homogamous";
  }
  return "?";
}

namespace {

void require_symmetric_2x2(const ModelParams& params) {
  if (params.k != 2) throw NotTwoByTwo("operation requires k = 2");
  double tol = 1e-9 * params.pi.max_abs();
  if (std::abs(params.pi(0, 1) - params.pi(1, 0)) > tol)
    throw SymmetryViolation("pi must satisfy pi12 = pi21");
}

}  // namespace

Sym2x2Params sym2x2_reduce(const ModelParams& params, const PopulationFractions& fractions) {
  require_symmetric_2x2(params);
  if (fractions.x.size() != 2) throw NotTwoByTwo("fractions must have two types");
  for (int i = 0; i < 2; ++i)
    if (std::abs(fractions.x[i] - fractions.y[i]) > 1e-12)
      throw SymmetryViolation("symmetric reduction requires x = y");
  const double pi11 = params.pi(0, 0), pi12 = params.pi(0, 1), pi22 = params.pi(1, 1);
  const double tol = 1e-9 * params.pi.max_abs();
  const double denom = pi11 + pi22 - 2.0 * pi12;
  Sym2x2Params s;
  if (std::abs(denom) <= tol) {
    s.case_tag = SymCase::FineBalance;
  } else if (std::abs(pi11 - pi12) <= tol) {
    s.case_tag = SymCase::GammaOne;
  } else if (std::abs(pi22 - pi12) <= tol) {
    s.case_tag = SymCase::GammaZero;
  } else {
    s.case_tag = SymCase::Generic;
  }
  if (std::abs(denom) > tol) s.gamma = (pi22 - pi12) / denom;
  if (std::abs(pi22 - pi12) > tol) s.theta1 = pi12 / (pi22 - pi12);
  if (std::abs(pi11 - pi12) > tol) s.theta2 = pi12 / (pi11 - pi12);
  return s;
}

MatingClass classify_2x2(const ModelParams& params) {
  require_symmetric_2x2(params);
  const double d = params.pi(0, 0) + params.pi(1, 1) - 2.0 * params.pi(0, 1);
  const double tol = 1e-9 * params.pi.max_abs();
  if (d > tol) return MatingClass::Homogamous;
  if (d < -tol) return MatingClass::Heterogamous;
  return MatingClass::Panmictic;
}

bool in_state_space(const Mat& m, const PopulationFractions& fractions, double tol) {
  const int k = static_cast<int>(fractions.x.size());
  if (m.rows() != k || m.cols() != k) return false;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (m(i, j) < -tol) return false;
  for (int i = 0; i < k; ++i)
    if (m.row_sum(i) > fractions.x[i] + tol) return false;
  for (int j = 0; j < k; ++j)
    if (m.col_sum(j) > fractions.y[j] + tol) return false;
  return true;
}

}  // namespace pairsim
