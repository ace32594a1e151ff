#include "pairsim/fluid.hpp"

#include <cmath>

#include "pairsim/errors.hpp"

namespace pairsim {

namespace {

void validate_fr(const ModelParams& params, const PopulationFractions& fractions) {
  if (static_cast<int>(fractions.x.size()) != params.k)
    throw DimensionMismatch("fractions and parameters disagree on k");
}

// Drift without membership validation, safe on the slight excursions RK
// stages can take. The 1 - M_tot = 0 boundary continues the formula by 0.
void raw_drift(const ModelParams& params, const PopulationFractions& fractions,
               const double* m, double* out) {
  const int k = params.k;
  double total = 0.0;
  for (int c = 0; c < k * k; ++c) total += m[c];
  double z = 1.0 - total;
  if (z <= 1e-15) {
    for (int c = 0; c < k * k; ++c) out[c] = 0.0;
    return;
  }
  double inv_z = 1.0 / z;
  for (int i = 0; i < k; ++i) {
    double xi = fractions.x[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) xi -= m[i * k + j];
    for (int j = 0; j < k; ++j) {
      double yj = fractions.y[static_cast<std::size_t>(j)];
      for (int i2 = 0; i2 < k; ++i2) yj -= m[i2 * k + j];
      out[i * k + j] = params.pi(i, j) * xi * yj * inv_z;
    }
  }
}

}  // namespace

Mat drift_F(const ModelParams& params, const PopulationFractions& fractions, const Mat& m) {
  validate_fr(params, fractions);
  if (m.rows() != params.k || m.cols() != params.k)
    throw InvalidState("state has wrong shape");
  if (!in_state_space(m, fractions, 1e-9))
    throw InvalidState("state outside the constraint set");
  Mat out = Mat::square(params.k);
  raw_drift(params, fractions, m.data().data(), out.data().data());
  return out;
}

Mat jacobian_F(const ModelParams& params, const PopulationFractions& fractions, const Mat& m) {
  validate_fr(params, fractions);
  if (m.rows() != params.k || m.cols() != params.k)
    throw InvalidState("state has wrong shape");
  if (!in_state_space(m, fractions, 1e-9))
    throw InvalidState("state outside the constraint set");
  const int k = params.k;
  double z = 1.0 - m.total();
  if (z <= 1e-12) throw InvalidState("Jacobian undefined at M_tot = 1");
  double inv_z = 1.0 / z;
  // Scaled residuals u_i = (x_i - M_i.)/Z and v_j = (y_j - M_.j)/Z; then
  // dF_ij/dM_i'j' = pi_ij (u_i v_j - u_i [j=j'] - v_j [i=i']).
  std::vector<double> u(static_cast<std::size_t>(k)), v(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    u[static_cast<std::size_t>(i)] = (fractions.x[static_cast<std::size_t>(i)] - m.row_sum(i)) * inv_z;
  for (int j = 0; j < k; ++j)
    v[static_cast<std::size_t>(j)] = (fractions.y[static_cast<std::size_t>(j)] - m.col_sum(j)) * inv_z;
  Mat jac(k * k, k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double ui = u[static_cast<std::size_t>(i)], vj = v[static_cast<std::size_t>(j)];
      for (int i2 = 0; i2 < k; ++i2)
        for (int j2 = 0; j2 < k; ++j2) {
          double d = ui * vj;
          if (j2 == j) d -= ui;
          if (i2 == i) d -= vj;
          jac(i * k + j, i2 * k + j2) = params.pi(i, j) * d;
        }
    }
  return jac;
}

FluidSolution::FluidSolution(int k, ode::Result result, double t_end)
    : k_(k), result_(std::move(result)), t_end_(t_end) {}

Mat FluidSolution::eval(double t) const {
  ode::Vec y = result_.eval(t);
  Mat m = Mat::square(k_);
  m.data() = std::move(y);
  return m;
}

Mat FluidSolution::at_node(std::size_t idx) const {
  Mat m = Mat::square(k_);
  m.data() = result_.ys[idx];
  return m;
}

Mat FluidSolution::drift_at_node(std::size_t idx) const {
  Mat m = Mat::square(k_);
  m.data() = result_.fs[idx];
  return m;
}

namespace {

FluidSolution integrate_impl(const ModelParams& params, const PopulationFractions& fractions,
                             double t_end, double rtol, const ode::StopFn& stop) {
  validate_fr(params, fractions);
  if (!(t_end > 0.0)) throw InvalidConfig("t_end must be positive");
  if (!(rtol > 0.0) || rtol > 1e-2) throw InvalidConfig("rtol must lie in (0, 1e-2]");
  const int k = params.k;
  double c1 = params.pi.min_value(), c2 = params.pi.max_abs();
  const double slack = 10.0 * rtol;

  ode::RhsFn rhs = [&params, &fractions](double, const ode::Vec& y, ode::Vec& dy) {
    raw_drift(params, fractions, y.data(), dy.data());
  };
  // Two-sided absorption bound, asserted on every accepted step.
  ode::PostStepFn check = [c1, c2, slack](double t, ode::Vec& y) {
    double total = 0.0;
    for (double v : y) total += v;
    double lo = 1.0 - std::exp(-c1 * t), hi = 1.0 - std::exp(-c2 * t);
    if (total < lo - slack || total > hi + slack)
      throw BoundViolation("fluid mass left the exponential absorption envelope");
  };
  ode::Options opt;
  opt.rtol = rtol;
  opt.atol = rtol * 1e-2;
  ode::Result r = ode::integrate(rhs, ode::Vec(static_cast<std::size_t>(k) * k, 0.0), 0.0,
                                 t_end, opt, stop, check);
  double t_last = r.ts.empty() ? t_end : r.ts.back();
  return FluidSolution(k, std::move(r), t_last);
}

}  // namespace

FluidSolution integrate_fluid(const ModelParams& params, const PopulationFractions& fractions,
                              double t_end, double rtol) {
  return integrate_impl(params, fractions, t_end, rtol, {});
}

std::pair<Mat, double> mating_pattern_limit(const ModelParams& params,
                                            const PopulationFractions& fractions, double eps,
                                            double rtol) {
  if (!(eps > 0.0) || eps >= 1.0) throw InvalidConfig("eps must lie in (0, 1)");
  double c1 = params.pi.min_value();
  // Z(t) <= exp(-c1 t), so Z reaches eps before t_star.
  double t_star = std::log(1.0 / eps) / c1;
  ode::StopFn stop = [eps](double, const ode::Vec& y) {
    double total = 0.0;
    for (double v : y) total += v;
    return 1.0 - total <= eps;
  };
  FluidSolution sol = integrate_impl(params, fractions, 1.1 * t_star + 1.0, rtol, stop);
  Mat q = sol.q_final();
  double z = 1.0 - q.total();
  if (z > eps) throw ToleranceNotMet("fluid integration failed to reach the target residual");
  return {q, z};
}

}  // namespace pairsim
