#include "pairsim/ode.hpp"

#include <algorithm>
#include <cmath>

#include "pairsim/errors.hpp"

namespace pairsim::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double rms(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

Vec Result::eval(double t) const {
  if (ts.empty()) return {};
  if (t <= ts.front()) return ys.front();
  if (t >= ts.back()) return ys.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  std::size_t lo = hi - 1;
  double h = ts[hi] - ts[lo];
  double th = (t - ts[lo]) / h;
  double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
  double h10 = th * (1.0 - th) * (1.0 - th);
  double h01 = th * th * (3.0 - 2.0 * th);
  double h11 = th * th * (th - 1.0);
  const Vec &y0 = ys[lo], &y1 = ys[hi], &f0 = fs[lo], &f1 = fs[hi];
  Vec out(y0.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
  return out;
}

Result integrate(const RhsFn& rhs, Vec y0, double t0, double t_end, const Options& opt,
                 const StopFn& stop, const PostStepFn& post_step) {
  const std::size_t dim = y0.size();
  Result res;
  double t = t0;
  Vec y = std::move(y0);
  Vec k1(dim), k2(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Vec k3(dim), ytmp(dim), ynew(dim), err(dim);
  rhs(t, y, k1);

  res.ts.push_back(t);
  res.ys.push_back(y);
  res.fs.push_back(k1);
  if (stop && stop(t, y)) {
    res.stopped = true;
    return res;
  }

  // Initial step from the local scale of y and f.
  double h = opt.h_init;
  if (h <= 0.0) {
    double span = t_end - t0;
    double d0 = rms(y) + opt.atol;
    double d1 = rms(k1) + opt.atol;
    h = std::clamp(0.01 * d0 / d1, 1e-8 * span, 0.1 * span);
    if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6;
    h = std::min(h, opt.h_max);
  }

  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    if (t >= t_end) return res;
    h = std::min({h, opt.h_max, t_end - t});
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw ToleranceNotMet("step size underflow in RK45");

    for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < dim; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, ynew, k7);

    double err_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                      e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double q = e / sc;
      err_norm += q * q;
    }
    err_norm = std::sqrt(err_norm / static_cast<double>(dim));

    if (err_norm <= 1.0) {
      t += h;
      y = ynew;
      bool adjusted = false;
      if (post_step) {
        Vec before = y;
        post_step(t, y);
        adjusted = y != before;
      }
      if (adjusted) rhs(t, y, k7);  // refresh the derivative at the new state
      k1 = k7;                      // first-same-as-last
      res.ts.push_back(t);
      res.ys.push_back(y);
      res.fs.push_back(k1);
      if (stop && stop(t, y)) {
        res.stopped = true;
        return res;
      }
    }
    double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }
  if (t < t_end) throw ToleranceNotMet("RK45 exceeded its step budget");
  return res;
}

}  // namespace pairsim::ode
