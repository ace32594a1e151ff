#include "pairsim/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "pairsim/errors.hpp"

namespace pairsim::quad {

namespace {

double eval_checked(const std::function<double(double)>& f, double x) {
  double v = f(x);
  if (!std::isfinite(v)) throw QuadratureFailure("integrand is not finite");
  return v;
}

// Classic recursive adaptive Simpson with interval doubling and the
// 15-point Richardson acceptance test.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = eval_checked(f, lm), frm = eval_checked(f, rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) throw QuadratureFailure("adaptive Simpson refinement bottomed out");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  double m = 0.5 * (a + b);
  double fa = eval_checked(f, a), fm = eval_checked(f, m), fb = eval_checked(f, b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return sign * simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double abs_tol,
                             int max_depth) {
  auto g = [&f, a](double u) {
    if (u >= 1.0) return 0.0;
    double om = 1.0 - u;
    double y = a + u / om;
    double v = f(y) / (om * om);
    // The decay assumption makes the transformed integrand vanish at u = 1;
    // protect against rounding noise from enormous y.
    return std::isfinite(v) ? v : 0.0;
  };
  return adaptive_simpson(g, 0.0, 1.0, abs_tol, max_depth);
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Trapezoid sums of a symmetric double-exponential node map, halving the
// step until two consecutive levels agree. The 1e-13 relative floor keeps
// large-magnitude integrals from chasing an absolute tolerance below
// roundoff.
double de_levels(const std::function<double(double)>& term, double t_max, double abs_tol,
                 const char* label) {
  double h = 1.0;
  double sum = term(0.0);
  for (int k = 1; k * h <= t_max; ++k) sum += term(k * h) + term(-k * h);
  double prev = sum * h;
  for (int level = 1; level <= 12; ++level) {
    h *= 0.5;
    for (int k = 1; k * h <= t_max; k += 2) sum += term(k * h) + term(-k * h);
    double cur = sum * h;
    if (level >= 2 && std::abs(cur - prev) <= std::max(abs_tol, 1e-13 * std::abs(cur)))
      return cur;
    prev = cur;
  }
  throw QuadratureFailure(label);
}

}  // namespace

double tanh_sinh(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double half = 0.5 * (b - a);
  auto term = [&](double t) {
    double s = std::sinh(t);
    // 1 - |tanh(pi/2 s)| = 2 / (1 + exp(pi |s|)), formed directly so nodes
    // approach the endpoints without rounding onto them; this is what lets
    // integrable endpoint singularities converge.
    double du = 2.0 / (1.0 + std::exp(std::numbers::pi * std::abs(s)));
    if (du <= 0.0) return 0.0;
    double x = (t >= 0.0) ? b - half * du : a + half * du;
    // An offset below the endpoint's own rounding grain collapses onto it;
    // skip such nodes rather than evaluate f exactly at the endpoint.
    if (x == a || x == b) return 0.0;
    double c = std::cosh(kHalfPi * s);
    double w = kHalfPi * std::cosh(t) / (c * c);
    return half * w * eval_checked(f, x);
  };
  return sign * de_levels(term, 4.0, abs_tol, "tanh-sinh failed to converge");
}

double exp_sinh(const std::function<double(double)>& f, double a, double abs_tol) {
  auto term = [&](double t) {
    double e = std::exp(kHalfPi * std::sinh(t));
    double w = kHalfPi * std::cosh(t) * e;
    return w * eval_checked(f, a + e);
  };
  return de_levels(term, 4.3, abs_tol, "exp-sinh failed to converge");
}

}  // namespace pairsim::quad
