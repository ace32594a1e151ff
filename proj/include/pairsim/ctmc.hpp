#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"
#include "pairsim/rng.hpp"

namespace pairsim {

enum class RecordMode { FullPath, PatternOnly, Snapshots };

struct SimConfig {
  std::uint64_t seed = 0;
  double t_max = std::numeric_limits<double>::infinity();
  RecordMode record_mode = RecordMode::FullPath;
  std::vector<double> snapshot_times;  // ascending; used in Snapshots mode
};

struct SimEvent {
  double t;
  int i, j;  // pair type formed, 0-based
};

struct SimTrajectory {
  std::vector<SimEvent> events;                  // FullPath mode
  std::vector<std::pair<double, Mat>> snapshots; // Snapshots mode
  Mat pattern;                                   // state at min(T_n, t_max)
  std::optional<double> t_absorb;                // set when all n pairs formed
};

/// Jump rates out of integer state M: rate(i,j) =
/// pi_ij (x_i - M_i.) (y_j - M_.j) / (n - M_tot), and identically zero once
/// M_tot = n. Throws InvalidState if M is not a valid integer state.
Mat transition_rates(const ModelParams& params, const PopulationCounts& pop, const Mat& m);

/// Exact realization of the pair-formation chain by Gillespie's direct
/// method: exponential holding time at the total rate, then a categorical
/// draw across the k^2 channels. Identical (params, pop, config) give a
/// bitwise-identical trajectory.
SimTrajectory simulate(const ModelParams& params, const PopulationCounts& pop,
                       const SimConfig& config);

/// Lazily extended unit-rate Poisson arrival times, one path per pair-type
/// channel. Channel (i, j) draws from the child stream split_seed(seed, i*k+j),
/// and a memoized prefix never changes as paths are extended, so simulations
/// driven by the same store and different population sizes share noise.
class PoissonPathStore {
 public:
  PoissonPathStore(int k, std::uint64_t seed);

  /// idx-th arrival time (0-based) of channel (i, j); extends the path on
  /// demand.
  double arrival(int i, int j, std::size_t idx);

  int k() const { return k_; }

 private:
  int k_;
  std::vector<std::vector<double>> arrivals_;
  std::vector<double> last_;
  std::vector<Rng> rngs_;
};

/// One trajectory of the size-n chain driven by the shared arrival paths:
/// channel (i, j) jumps when its integrated rate reaches the next stored
/// arrival. Marginally distributed exactly as simulate(); across population
/// sizes the shared paths couple the runs pathwise.
SimTrajectory simulate_with_store(const ModelParams& params, const PopulationCounts& pop,
                                  PoissonPathStore& store, const SimConfig& config);

/// Coupled trajectories for each n in n_list (populations rounded from the
/// fractions), all driven by one PoissonPathStore seeded from config.seed.
std::vector<SimTrajectory> simulate_coupled(const ModelParams& params,
                                            const PopulationFractions& fractions,
                                            const std::vector<long>& n_list,
                                            const SimConfig& config);

/// Expected absorbed pattern E[Q(T_n)] by first-step analysis over the full
/// state lattice, memoized per state. Exact up to rounding; feasible for
/// small populations only. Throws StateSpaceTooLarge past max_states.
Mat exact_pattern_oracle(const ModelParams& params, const PopulationCounts& pop,
                         std::size_t max_states = 1000000);

/// Monte Carlo mean and per-entry sample variance of the absorbed pattern.
/// Replicate r runs simulate() with seed split_seed(seed, r); replicates fan
/// out across worker threads but reduce in replicate order, so the result
/// does not depend on thread count.
struct McPattern {
  Mat mean;
  Mat variance;
  long replicates = 0;
};

McPattern mc_pattern(const ModelParams& params, const PopulationCounts& pop, long replicates,
                     std::uint64_t seed);

}  // namespace pairsim
