#pragma once

#include <utility>
#include <vector>

#include "pairsim/fluid.hpp"
#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"

namespace pairsim {

/// Unmatched-singles view of a pair state: X_i = x_i - Q_i., Y_j = y_j - Q_.j,
/// Z = 1 - Q_tot, plus the normalized type profiles A = X/Z and B = Y/Z.
struct SinglesState {
  std::vector<double> X, Y;
  double Z = 1.0;
  std::vector<double> A, B;
};

/// Throws Absorbed when Q_tot has reached 1 (Z <= 1e-14), InvalidState when Q
/// leaves the constraint set.
SinglesState to_singles(const PopulationFractions& fractions, const Mat& q);

/// Competitive Lotka-Volterra field for the singles masses:
/// dX_i/dt = -X_i (Pi Y)_i / Z and dY_j/dt = -Y_j (Pi^T X)_j / Z.
/// Throws SingularZ when Z <= 0.
std::pair<std::vector<double>, std::vector<double>> lv_vector_field(const ModelParams& params,
                                                                    const SinglesState& state);

/// Replicator field on the 2k-simplex for C = (A, B)/2:
/// dC_u/dt = -2 C_u ((Phat C)_u - C^T Phat C), where Phat is the block
/// matrix [[0, Pi], [Pi^T, 0]]. Throws InvalidSimplexPoint for points off
/// the simplex (entries >= -1e-12, sum within 1e-8 of 1).
std::vector<double> replicator_vector_field(const ModelParams& params,
                                            const std::vector<double>& c);

/// dZ/dt = -Z * A^T Pi B.
double z_vector_field(const ModelParams& params, const std::vector<double>& a,
                      const std::vector<double>& b, double z);

/// Pair-formation rate dQ_ij/dt = pi_ij Z A_i B_j.
Mat reconstruct_q_rate(const ModelParams& params, const std::vector<double>& a,
                       const std::vector<double>& b, double z);

/// Fluid solution computed through the (A, B, Z) route: integrate the
/// replicator/Z system together with the reconstructed Q rates, renormalizing
/// A and B after each accepted step. Agrees with integrate_fluid up to
/// integration error.
FluidSolution integrate_replicator(const ModelParams& params,
                                   const PopulationFractions& fractions, double t_end,
                                   double rtol = 1e-8);

}  // namespace pairsim
