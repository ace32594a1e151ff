#pragma once

#include <cstdint>
#include <vector>

#include "pairsim/ctmc.hpp"
#include "pairsim/fluid.hpp"
#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"

namespace pairsim {

/// Largest entrywise distance between the scaled chain state M(t)/n and the
/// fluid path over [0, t_hi]. The chain state is piecewise constant and every
/// fluid entry is monotone, so the supremum is attained at a jump time (just
/// before or just after a jump) or at t_hi; those are the points checked.
/// Requires a trajectory recorded in FullPath mode and a fluid solution
/// covering [0, t_hi].
double sup_norm_error(const SimTrajectory& traj, long n, const FluidSolution& fluid,
                      double t_hi);

/// One coupled-simulation measurement: trajectory of the size-n chain under
/// seed, compared against the fluid path.
struct ConvergenceRow {
  long n = 0;
  std::uint64_t seed = 0;
  double sup_error = 0.0;
};

/// Runs n_seeds coupled families (one PoissonPathStore per seed, shared by
/// every n in n_list) and measures each trajectory against the fluid path on
/// [0, t_hi]. Rows are ordered seed-major, then by n_list position. Seeds
/// fan out across worker threads; the row order is fixed either way.
std::vector<ConvergenceRow> convergence_study(const ModelParams& params,
                                              const PopulationFractions& fractions,
                                              const std::vector<long>& n_list, int n_seeds,
                                              std::uint64_t base_seed, double t_hi);

/// Limit pattern entry Q_12(infinity) on a (pi11, pi22) grid at fixed
/// pi12 = pi21 and x1 = y1. Rate values at or below the positivity floor
/// 1e-8 are clamped to it (the limit is continuous there). Cells within the
/// fine-balance tolerance of pi11 + pi22 = 2 pi12 take the product value
/// x1 (1 - x1); all others go through the closed-form solution.
struct LevelCurveGrid {
  double pi12 = 0.0;
  double x1 = 0.0;
  std::vector<double> values;  // grid coordinates, shared by both axes
  Mat q12;                     // q12(i, j) at pi11 = values[i], pi22 = values[j]
};

/// Requires steps >= 2, lo < hi, pi12 > 0 and x1 in (0, 1). Cells are
/// independent and fan out across worker threads.
LevelCurveGrid levelcurves_grid(double lo, double hi, int steps, double pi12, double x1);

}  // namespace pairsim
