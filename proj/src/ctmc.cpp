#include "pairsim/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pairsim/errors.hpp"
#include "pairsim/parallel.hpp"

namespace pairsim {

namespace {

constexpr std::size_t kEventCap = 10000000;  // FullPath recording limit

void validate_params_pop(const ModelParams& params, const PopulationCounts& pop) {
  if (static_cast<int>(pop.x.size()) != params.k)
    throw DimensionMismatch("population and parameters disagree on k");
}

void validate_config(const SimConfig& cfg) {
  if (!(cfg.t_max > 0.0)) throw InvalidConfig("t_max must be positive");
  for (std::size_t s = 1; s < cfg.snapshot_times.size(); ++s)
    if (cfg.snapshot_times[s] < cfg.snapshot_times[s - 1])
      throw InvalidConfig("snapshot times must be ascending");
  if (!cfg.snapshot_times.empty() && cfg.snapshot_times.front() < 0.0)
    throw InvalidConfig("snapshot times must be nonnegative");
}

// Shared bookkeeping for both simulators: integer state plus residual-single
// tallies, snapshot emission and event recording.
struct SimState {
  explicit SimState(const ModelParams& params, const PopulationCounts& pop, const SimConfig& cfg)
      : k(params.k), m(Mat::square(params.k)), xres(pop.x), yres(pop.y), singles(pop.n),
        config(&cfg) {
    record_events = cfg.record_mode == RecordMode::FullPath;
    if (cfg.record_mode == RecordMode::Snapshots) snap = cfg.snapshot_times;
  }

  void flush_snapshots_before(double t_event) {
    while (snap_idx < snap.size() && snap[snap_idx] < t_event) {
      out.snapshots.emplace_back(snap[snap_idx], m);
      ++snap_idx;
    }
  }

  void flush_snapshots_at(double t_event) {
    while (snap_idx < snap.size() && snap[snap_idx] <= t_event) {
      out.snapshots.emplace_back(snap[snap_idx], m);
      ++snap_idx;
    }
  }

  void apply(double t, int i, int j) {
    flush_snapshots_before(t);
    m(i, j) += 1.0;
    xres[static_cast<std::size_t>(i)] -= 1;
    yres[static_cast<std::size_t>(j)] -= 1;
    --singles;
    flush_snapshots_at(t);
    if (record_events) {
      if (out.events.size() < kEventCap) {
        out.events.push_back({t, i, j});
      } else {
        record_events = false;  // degrade to pattern-only past the cap
      }
    }
  }

  SimTrajectory finish(double t, bool absorbed) {
    // After absorption the state is constant, so any remaining snapshot
    // times receive the final pattern.
    while (snap_idx < snap.size()) {
      out.snapshots.emplace_back(snap[snap_idx], m);
      ++snap_idx;
    }
    out.pattern = m;
    if (absorbed) out.t_absorb = t;
    return std::move(out);
  }

  int k;
  Mat m;
  std::vector<long> xres, yres;
  long singles;
  const SimConfig* config;
  SimTrajectory out;
  std::vector<double> snap;
  std::size_t snap_idx = 0;
  bool record_events = false;
};

}  // namespace

Mat transition_rates(const ModelParams& params, const PopulationCounts& pop, const Mat& m) {
  validate_params_pop(params, pop);
  const int k = params.k;
  if (m.rows() != k || m.cols() != k) throw InvalidState("state has wrong shape");
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double v = m(i, j);
      if (std::abs(v - std::round(v)) > 1e-9 || v < -1e-9)
        throw InvalidState("state entries must be nonnegative integers");
      total += v;
    }
  for (int i = 0; i < k; ++i)
    if (m.row_sum(i) > static_cast<double>(pop.x[static_cast<std::size_t>(i)]) + 1e-9)
      throw InvalidState("row sum exceeds female type count");
  for (int j = 0; j < k; ++j)
    if (m.col_sum(j) > static_cast<double>(pop.y[static_cast<std::size_t>(j)]) + 1e-9)
      throw InvalidState("column sum exceeds male type count");

  Mat rates = Mat::square(k);
  double singles = static_cast<double>(pop.n) - total;
  if (singles <= 0.5) return rates;  // absorbed: all rates zero
  for (int i = 0; i < k; ++i) {
    double xi = static_cast<double>(pop.x[static_cast<std::size_t>(i)]) - m.row_sum(i);
    for (int j = 0; j < k; ++j) {
      double yj = static_cast<double>(pop.y[static_cast<std::size_t>(j)]) - m.col_sum(j);
      rates(i, j) = params.pi(i, j) * xi * yj / singles;
    }
  }
  return rates;
}

SimTrajectory simulate(const ModelParams& params, const PopulationCounts& pop,
                       const SimConfig& config) {
  validate_params_pop(params, pop);
  validate_config(config);
  const int k = params.k;
  SimState st(params, pop, config);
  Rng rng(config.seed);
  double t = 0.0;
  std::vector<double> rates(static_cast<std::size_t>(k) * k);

  while (st.singles > 0) {
    double total = 0.0;
    const double inv_singles = 1.0 / static_cast<double>(st.singles);
    for (int i = 0; i < k; ++i) {
      double xi = static_cast<double>(st.xres[static_cast<std::size_t>(i)]);
      for (int j = 0; j < k; ++j) {
        double r = params.pi(i, j) * xi *
                   static_cast<double>(st.yres[static_cast<std::size_t>(j)]) * inv_singles;
        rates[static_cast<std::size_t>(i * k + j)] = r;
        total += r;
      }
    }
    // With pi > 0 and singles of both sexes remaining, total is positive.
    double dt = rng.exponential(total);
    if (t + dt > config.t_max) {
      t = config.t_max;
      st.flush_snapshots_at(t);
      return st.finish(t, false);
    }
    t += dt;
    double u = rng.uniform() * total;
    int pick = -1;
    double acc = 0.0;
    for (int c = 0; c < k * k; ++c) {
      acc += rates[static_cast<std::size_t>(c)];
      if (u < acc) {
        pick = c;
        break;
      }
    }
    if (pick < 0) {  // float dust: take the last positive channel
      for (int c = k * k - 1; c >= 0; --c)
        if (rates[static_cast<std::size_t>(c)] > 0.0) {
          pick = c;
          break;
        }
    }
    st.apply(t, pick / k, pick % k);
  }
  return st.finish(t, true);
}

PoissonPathStore::PoissonPathStore(int k, std::uint64_t seed) : k_(k) {
  const std::size_t nchan = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  arrivals_.resize(nchan);
  last_.assign(nchan, 0.0);
  rngs_.reserve(nchan);
  for (std::size_t c = 0; c < nchan; ++c) rngs_.emplace_back(split_seed(seed, c));
}

double PoissonPathStore::arrival(int i, int j, std::size_t idx) {
  const std::size_t c = static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) +
                        static_cast<std::size_t>(j);
  auto& path = arrivals_[c];
  while (path.size() <= idx) {
    last_[c] += rngs_[c].exponential(1.0);
    path.push_back(last_[c]);
  }
  return path[idx];
}

SimTrajectory simulate_with_store(const ModelParams& params, const PopulationCounts& pop,
                                  PoissonPathStore& store, const SimConfig& config) {
  validate_params_pop(params, pop);
  validate_config(config);
  if (store.k() != params.k) throw DimensionMismatch("path store has wrong k");
  const int k = params.k;
  SimState st(params, pop, config);
  double t = 0.0;
  const std::size_t nchan = static_cast<std::size_t>(k) * k;
  std::vector<double> clock(nchan, 0.0);  // integrated rate per channel
  std::vector<std::size_t> consumed(nchan, 0);
  std::vector<double> rates(nchan);

  while (st.singles > 0) {
    const double inv_singles = 1.0 / static_cast<double>(st.singles);
    for (int i = 0; i < k; ++i) {
      double xi = static_cast<double>(st.xres[static_cast<std::size_t>(i)]);
      for (int j = 0; j < k; ++j)
        rates[static_cast<std::size_t>(i * k + j)] =
            params.pi(i, j) * xi *
            static_cast<double>(st.yres[static_cast<std::size_t>(j)]) * inv_singles;
    }
    // Channel c fires when its internal clock reaches the next stored
    // arrival; rates are constant between events, so the wall-clock wait is
    // (arrival - clock) / rate.
    int winner = -1;
    double dt_min = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nchan; ++c) {
      if (rates[c] <= 0.0) continue;
      double target = store.arrival(static_cast<int>(c) / k, static_cast<int>(c) % k,
                                    consumed[c]);
      double dt = (target - clock[c]) / rates[c];
      if (dt < dt_min) {
        dt_min = dt;
        winner = static_cast<int>(c);
      }
    }
    if (winner < 0) break;  // unreachable with pi > 0
    if (t + dt_min > config.t_max) {
      double span = config.t_max - t;
      for (std::size_t c = 0; c < nchan; ++c) clock[c] += rates[c] * span;
      t = config.t_max;
      st.flush_snapshots_at(t);
      return st.finish(t, false);
    }
    for (std::size_t c = 0; c < nchan; ++c) clock[c] += rates[c] * dt_min;
    const std::size_t w = static_cast<std::size_t>(winner);
    clock[w] = store.arrival(winner / k, winner % k, consumed[w]);  // land exactly
    consumed[w] += 1;
    t += dt_min;
    st.apply(t, winner / k, winner % k);
  }
  return st.finish(t, true);
}

std::vector<SimTrajectory> simulate_coupled(const ModelParams& params,
                                            const PopulationFractions& fractions,
                                            const std::vector<long>& n_list,
                                            const SimConfig& config) {
  if (static_cast<int>(fractions.x.size()) != params.k)
    throw DimensionMismatch("fractions and parameters disagree on k");
  PoissonPathStore store(params.k, config.seed);
  std::vector<SimTrajectory> out;
  out.reserve(n_list.size());
  for (long n : n_list) {
    PopulationCounts pop = round_fractions(fractions, n);
    out.push_back(simulate_with_store(params, pop, store, config));
  }
  return out;
}

namespace {

struct OracleCtx {
  const ModelParams* params;
  const PopulationCounts* pop;
  std::size_t max_states;
  std::map<std::vector<int>, Mat> memo;

  Mat solve(std::vector<int>& state, long placed) {
    auto it = memo.find(state);
    if (it != memo.end()) return it->second;
    if (memo.size() >= max_states)
      throw StateSpaceTooLarge("state space exceeds the oracle limit");
    const int k = params->k;
    Mat m = Mat::square(k);
    std::vector<double> rowc(static_cast<std::size_t>(k), 0.0),
        colc(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double v = static_cast<double>(state[static_cast<std::size_t>(i * k + j)]);
        m(i, j) = v;
        rowc[static_cast<std::size_t>(i)] += v;
        colc[static_cast<std::size_t>(j)] += v;
      }
    if (placed == pop->n) {
      memo.emplace(state, m);
      return m;
    }
    // First-step analysis: the absorbed mean is the rate-weighted mean over
    // successor states. The shared 1/(n - M_tot) factor cancels.
    double total_w = 0.0;
    Mat expect = Mat::square(k);
    for (int i = 0; i < k; ++i) {
      double xi = static_cast<double>((*pop).x[static_cast<std::size_t>(i)]) -
                  rowc[static_cast<std::size_t>(i)];
      if (xi <= 0.0) continue;
      for (int j = 0; j < k; ++j) {
        double yj = static_cast<double>((*pop).y[static_cast<std::size_t>(j)]) -
                    colc[static_cast<std::size_t>(j)];
        if (yj <= 0.0) continue;
        double w = params->pi(i, j) * xi * yj;
        state[static_cast<std::size_t>(i * k + j)] += 1;
        Mat next = solve(state, placed + 1);
        state[static_cast<std::size_t>(i * k + j)] -= 1;
        next *= w;
        expect += next;
        total_w += w;
      }
    }
    expect *= 1.0 / total_w;
    memo.emplace(state, expect);
    return expect;
  }
};

}  // namespace

Mat exact_pattern_oracle(const ModelParams& params, const PopulationCounts& pop,
                         std::size_t max_states) {
  validate_params_pop(params, pop);
  OracleCtx ctx{&params, &pop, max_states, {}};
  std::vector<int> zero(static_cast<std::size_t>(params.k) * params.k, 0);
  return ctx.solve(zero, 0);
}

McPattern mc_pattern(const ModelParams& params, const PopulationCounts& pop, long replicates,
                     std::uint64_t seed) {
  if (replicates <= 0) throw InvalidConfig("replicates must be positive");
  const int k = params.k;
  const std::size_t kk = static_cast<std::size_t>(k) * k;
  std::vector<double> patterns(static_cast<std::size_t>(replicates) * kk);
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    SimConfig cfg;
    cfg.seed = split_seed(seed, r);
    cfg.record_mode = RecordMode::PatternOnly;
    SimTrajectory traj = simulate(params, pop, cfg);
    for (std::size_t c = 0; c < kk; ++c)
      patterns[r * kk + c] = traj.pattern.data()[c];
  });
  // Reduce in replicate order for thread-count independence.
  McPattern res;
  res.replicates = replicates;
  res.mean = Mat::square(k);
  res.variance = Mat::square(k);
  for (long r = 0; r < replicates; ++r)
    for (std::size_t c = 0; c < kk; ++c)
      res.mean.data()[c] += patterns[static_cast<std::size_t>(r) * kk + c];
  res.mean *= 1.0 / static_cast<double>(replicates);
  if (replicates > 1) {
    for (long r = 0; r < replicates; ++r)
      for (std::size_t c = 0; c < kk; ++c) {
        double d = patterns[static_cast<std::size_t>(r) * kk + c] - res.mean.data()[c];
        res.variance.data()[c] += d * d;
      }
    res.variance *= 1.0 / static_cast<double>(replicates - 1);
  }
  return res;
}

}  // namespace pairsim
