#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace pairsim::ode {

using Vec = std::vector<double>;
using RhsFn = std::function<void(double t, const Vec& y, Vec& dydt)>;
using StopFn = std::function<bool(double t, const Vec& y)>;
using PostStepFn = std::function<void(double t, Vec& y)>;

struct Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 = choose automatically
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2000000;
};

/// Accepted-step nodes with derivatives, enough for cubic Hermite
/// interpolation between nodes.
struct Result {
  std::vector<double> ts;
  std::vector<Vec> ys;
  std::vector<Vec> fs;
  bool stopped = false;  // the stop predicate ended integration early

  /// Dense output by cubic Hermite interpolation; clamps outside [t0, t_end].
  Vec eval(double t) const;
};

/// Embedded Dormand-Prince 5(4) with step rejection. post_step may adjust the
/// accepted state in place (e.g. renormalization); the derivative is then
/// recomputed at the adjusted state. stop is checked after each accepted
/// step. Throws ToleranceNotMet when the step size underflows or the step
/// budget runs out.
Result integrate(const RhsFn& rhs, Vec y0, double t0, double t_end, const Options& opt,
                 const StopFn& stop = {}, const PostStepFn& post_step = {});

}  // namespace pairsim::ode
