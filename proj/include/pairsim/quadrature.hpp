#pragma once

#include <functional>

namespace pairsim::quad {

/// Adaptive Simpson integration of f over [a, b] (a > b allowed, giving the
/// signed value) to absolute tolerance abs_tol. Throws QuadratureFailure on
/// non-finite integrand values or when refinement bottoms out.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 60);

/// Integral of f over [a, infinity) via the substitution
/// y = a + u / (1 - u), u in [0, 1). The integrand must decay fast enough
/// for the transformed integrand to vanish at u = 1.
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double abs_tol = 1e-10, int max_depth = 60);

/// Tanh-sinh (double-exponential) integration over the finite interval
/// [a, b], signed when a > b. The node map pushes abscissas toward the
/// endpoints at a double-exponential rate, so integrable endpoint
/// singularities and sharp boundary layers converge where interval
/// bisection stalls. A singular endpoint at 0 resolves to full precision;
/// at a nonzero endpoint the achievable accuracy is capped by that
/// endpoint's absolute rounding grain (about 1e-8 of the interval scale
/// for an unbounded integrand). Throws QuadratureFailure on non-finite
/// values or if successive refinements fail to settle within abs_tol.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12);

/// Exp-sinh (double-exponential) integration over [a, infinity) for
/// integrands with power-law or faster decay.
double exp_sinh(const std::function<double(double)>& f, double a,
                double abs_tol = 1e-12);

}  // namespace pairsim::quad
