#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pairsim/fluid.hpp"
#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"

namespace pairsim {

/// One Euler path of the Gaussian fluctuation process V around the fluid
/// trajectory. v[m] is the k x k state at times[m]; v[0] = 0.
struct FluctuationPath {
  std::vector<double> times;
  std::vector<Mat> v;
};

/// One Euler path of the diffusion approximation of Q^n/n. z[m] stays inside
/// the constraint set; z[0] = 0.
struct DiffusionPath {
  std::vector<double> times;
  std::vector<Mat> z;
};

/// Pre-generated Brownian increments on a uniform grid, one independent
/// component per pair-type channel. Runs with step sizes that are integer
/// multiples of dt() can consume the same grid, which couples them pathwise.
struct BrownianGrid {
  int k = 0;
  double t_end = 0.0;
  std::size_t steps = 0;
  std::vector<double> dw;  // steps * k * k, row-major within each step

  double dt() const { return t_end / static_cast<double>(steps); }
};

/// Fills a grid with N(0, dt) increments drawn from Rng(seed), step by step
/// and row-major within each step.
BrownianGrid make_brownian_grid(int k, double t_end, std::size_t steps, std::uint64_t seed);

/// Projects a k x k state onto the constraint set: clamps negative entries to
/// zero, then scales any row and then any column whose sum exceeds its margin
/// back onto it. Column scaling only shrinks entries, so the row constraints
/// survive the second pass.
void project_state(Mat& z, const PopulationFractions& fractions);

/// Euler scheme for the linear SDE dV = J(Q(t)) V dt + dW(t), where J is the
/// drift Jacobian along the fluid path and the increments of W are
/// independent N(0, Q_ij(t+dt) - Q_ij(t)) per entry, scaled by noise_scale.
/// The step count is ceil(t_end / dt), so the step used never exceeds dt.
/// Identical seeds give bitwise-identical noise regardless of noise_scale.
/// Requires dt in (0, 1e-2] and a fluid solution covering [0, t_end]
/// (MissingFluidSolution otherwise).
FluctuationPath simulate_clt_limit(const ModelParams& params, const PopulationFractions& fractions,
                                   const FluidSolution& fluid, double t_end, double dt,
                                   std::uint64_t seed, double noise_scale = 1.0);

/// Euler-Maruyama scheme for dZ = F(Z) dt + sqrt(F(Z)/n) dW with independent
/// Brownian components per entry, scaled by noise_scale. After each step the
/// state is projected back into the constraint set: negative entries are
/// clamped to zero, then any row and column whose sum exceeds its margin is
/// scaled back onto it. Requires n >= 10 and dt in (0, 1e-2].
DiffusionPath simulate_diffusion(const ModelParams& params, const PopulationFractions& fractions,
                                 long n, double t_end, double dt, std::uint64_t seed,
                                 double noise_scale = 1.0);

/// Same scheme driven by a pre-generated grid with step grid.dt() * stride
/// (the coarse increment is the sum of the fine ones). stride must divide
/// grid.steps. Paths run from one grid at different strides differ only by
/// discretization error, which is what a strong-convergence measurement
/// needs.
DiffusionPath simulate_diffusion_on_grid(const ModelParams& params,
                                         const PopulationFractions& fractions, long n,
                                         const BrownianGrid& grid, std::size_t stride);

/// Empirical versus limiting covariance of the scaled fluctuation
/// sqrt(n) (Q^n(t)/n - Q(t)) at a single probe time. cov_empirical comes
/// from `replicates` exact chain runs, cov_limit from as many Euler paths of
/// the fluctuation SDE; both are k^2 x k^2 with pairs flattened row-major.
/// rel_diff is |cov_empirical - cov_limit| / max(|cov_limit|, 1e-12)
/// entrywise. mean_scaled and se_scaled hold the per-entry sample mean of
/// the scaled fluctuation and its standard error. Replicate r of either
/// family draws from a dedicated child stream of seed, so the result is
/// independent of thread count.
struct FluctuationReport {
  long n = 0;
  double t = 0.0;
  long replicates = 0;
  Mat cov_empirical;
  Mat cov_limit;
  Mat rel_diff;
  std::vector<double> mean_scaled;
  std::vector<double> se_scaled;
};

/// Requires t_probe > 0 and replicates >= 1000; smaller studies are too noisy
/// to report a covariance. The probe time must be reachable by the fluid
/// integrator (it always is, for valid parameters).
FluctuationReport empirical_fluctuations(const ModelParams& params,
                                         const PopulationFractions& fractions, long n,
                                         double t_probe, long replicates, std::uint64_t seed);

}  // namespace pairsim
