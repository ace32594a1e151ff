#pragma once

#include <utility>
#include <vector>

#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"
#include "pairsim/ode.hpp"

namespace pairsim {

/// Fluid drift: F_ij(M) = pi_ij (x_i - M_i.) (y_j - M_.j) / (1 - M_tot),
/// and 0 at M_tot = 1. Throws InvalidState if M is outside the constraint
/// set (tolerance 1e-9).
Mat drift_F(const ModelParams& params, const PopulationFractions& fractions, const Mat& m);

/// Derivative of the drift: returns the k^2 x k^2 matrix
/// J[(i,j),(i',j')] = dF_ij / dM_i'j' with pairs flattened row-major.
Mat jacobian_F(const ModelParams& params, const PopulationFractions& fractions, const Mat& m);

/// Fluid trajectory on [0, t_end] with dense output between accepted steps.
class FluidSolution {
 public:
  FluidSolution(int k, ode::Result result, double t_end);

  Mat eval(double t) const;
  double z_at(double t) const { return 1.0 - eval(t).total(); }

  double t_end() const { return t_end_; }
  const std::vector<double>& times() const { return result_.ts; }
  Mat at_node(std::size_t idx) const;
  Mat drift_at_node(std::size_t idx) const;
  std::size_t node_count() const { return result_.ts.size(); }

  /// Final state; all entries are nondecreasing in t, so this is the best
  /// available approximation of the limit pattern.
  Mat q_final() const { return at_node(node_count() - 1); }

  /// Unmatched mass 1 - Q_tot(t_end): a bound on how far any entry still is
  /// from its limit.
  double error_bound() const { return 1.0 - q_final().total(); }

 private:
  int k_;
  ode::Result result_;
  double t_end_;
};

/// Integrates dQ/dt = F(Q) from Q(0) = 0 by adaptive RK45 at local relative
/// tolerance rtol. Each accepted step is checked against the two-sided bound
/// 1 - exp(-c1 t) <= Q_tot(t) <= 1 - exp(-c2 t) (c1 = min pi, c2 = max pi)
/// with slack 10 * rtol; violations throw BoundViolation.
FluidSolution integrate_fluid(const ModelParams& params, const PopulationFractions& fractions,
                              double t_end, double rtol = 1e-8);

/// Integrates until the unmatched mass satisfies Z(t) <= eps and returns the
/// pattern with error_bound = Z(t_end). Termination is guaranteed before
/// t = log(1/eps) / c1.
std::pair<Mat, double> mating_pattern_limit(const ModelParams& params,
                                            const PopulationFractions& fractions, double eps,
                                            double rtol = 1e-10);

}  // namespace pairsim
