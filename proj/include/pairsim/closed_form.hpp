#pragma once

#include <memory>
#include <vector>

#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"

namespace pairsim {

/// Time-t state of the fluid system: single-type profiles A and B, the
/// singles fraction Z, and the pair-type matrix Q.
struct FluidState {
  std::vector<double> A, B;
  double Z = 1.0;
  Mat Q;
};

/// Closed-form fluid solution, available whenever the rates split
/// additively as pi_ij = alpha_bar_i + beta_bar_j. Every pair type then
/// fills independently: Q_ij(t) = x_i y_j (1 - exp(-pi_ij t)), so the
/// limiting pattern is the product x y^T regardless of the rates.
class FineBalanceSolution {
 public:
  /// Throws NotFineBalance when the rates do not split additively.
  FineBalanceSolution(const ModelParams& params, const PopulationFractions& fractions);

  int k() const { return params_.k; }
  const FineBalanceDecomposition& decomposition() const { return decomp_; }

  FluidState eval(double t) const;

  /// Q(infinity) = x y^T.
  Mat pattern() const;

 private:
  ModelParams params_;
  PopulationFractions fractions_;
  FineBalanceDecomposition decomp_;
};

/// Where the singles profile of the symmetric 2x2 system settles. a1_inf
/// is the limit of A_1(t). limit_inf is the limit of the substitution
/// variable used by the pattern integral: xi(t) = (x1 - A_1)/(A_1 - gamma)
/// in the generic case, zeta(t) = (1-x1)A_1/(x1(1-A_1)) when pi11 = pi12
/// (for pi22 = pi12, the zeta of the type-swapped system), and NaN when
/// A_1 sits at the interior fixed point.
struct Sym2x2Equilibrium {
  double a1_inf = 0.0;
  double limit_inf = 0.0;
};

/// Closed-form solution of the symmetric 2x2 fluid system (pi symmetric,
/// x = y, x1 in (0, 1)). A_1(t) comes from bisection on its implicit orbit
/// equation, Z from an explicit function of A_1, and Q_12 from a
/// one-dimensional integral over the orbit. Additively split rates are
/// rejected here (FineBalanceExcluded); FineBalanceSolution covers them.
/// Instances are movable but not copyable.
class Sym2x2Solution {
 public:
  Sym2x2Solution(const ModelParams& params, const PopulationFractions& fractions);

  SymCase case_tag() const { return constants_.case_tag; }
  const Sym2x2Params& constants() const { return constants_; }
  double x1() const { return x1_; }
  /// True when x1 equals the interior fixed point gamma, pinning A_1.
  bool at_fixed_point() const { return at_fixed_point_; }

  Sym2x2Equilibrium equilibrium() const { return eq_; }

  /// A_1(t), to absolute accuracy 1e-12. t = infinity gives the limit.
  double a1_of_t(double t) const;

  /// Singles fraction as a function of the profile value. a1 must lie on
  /// the orbit through x1 (same side of gamma, inside (0, 1)); throws
  /// DomainError otherwise, and always when A_1 is pinned at gamma.
  double z_of_a1(double a1) const;

  double z_of_t(double t) const;
  double q12_of_t(double t) const;
  double q12_infinity() const;

  /// Full limiting pattern assembled from q12_infinity and the margins.
  Mat pattern() const;

  MatingClass mating_class() const;

 private:
  double orbit_log(double a) const;
  double q12_from_limit(double limit) const;
  double generic_integrand(double y) const;
  double gamma_one_integrand(double w) const;

  ModelParams params_;
  PopulationFractions fractions_;
  Sym2x2Params constants_;
  double pi11_ = 0.0, pi12_ = 0.0, pi22_ = 0.0;
  double x1_ = 0.0, delta_ = 0.0;
  double gamma_ = 0.0, theta1_ = 0.0, theta2_ = 0.0;
  bool at_fixed_point_ = false;
  Sym2x2Equilibrium eq_;
  std::unique_ptr<Sym2x2Solution> relabeled_;  // set when pi22 = pi12
};

}  // namespace pairsim
