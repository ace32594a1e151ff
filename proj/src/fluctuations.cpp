#include "pairsim/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "pairsim/ctmc.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/parallel.hpp"
#include "pairsim/rng.hpp"

namespace pairsim {

namespace {

void check_step(double t_end, double dt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw InvalidConfig("horizon must be positive and finite");
  if (!(dt > 0.0) || dt > 1e-2) throw InvalidConfig("step size must be in (0, 1e-2]");
}

std::size_t step_count(double t_end, double dt) {
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
}

// Per-step data of the linearized SDE along the fluid path: the Jacobian at
// the left node and the entrywise standard deviation sqrt(Q(t+h) - Q(t)) of
// the Brownian-integral increment. Shared by every replicate, so it is built
// once per study.
struct CltTable {
  int k = 0;
  double h = 0.0;
  std::vector<double> times;             // steps + 1 nodes
  std::vector<Mat> jac;                  // k^2 x k^2 at each left node
  std::vector<std::vector<double>> sdq;  // k^2 per step
};

CltTable build_clt_table(const ModelParams& params, const PopulationFractions& fractions,
                         const FluidSolution& fluid, double t_end, double dt) {
  check_step(t_end, dt);
  if (fluid.t_end() < t_end)
    throw MissingFluidSolution("fluid solution does not cover the requested horizon");
  const int k = params.k;
  const std::size_t kk = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  CltTable table;
  table.k = k;
  const std::size_t steps = step_count(t_end, dt);
  table.h = t_end / static_cast<double>(steps);
  table.times.resize(steps + 1);
  table.jac.reserve(steps);
  table.sdq.reserve(steps);
  Mat q_cur = fluid.eval(0.0);
  table.times[0] = 0.0;
  for (std::size_t m = 0; m < steps; ++m) {
    const double t_next = (m + 1 == steps) ? t_end : static_cast<double>(m + 1) * table.h;
    table.times[m + 1] = t_next;
    table.jac.push_back(jacobian_F(params, fractions, q_cur));
    Mat q_next = fluid.eval(t_next);
    std::vector<double> s(kk);
    for (std::size_t a = 0; a < kk; ++a)
      s[a] = std::sqrt(std::max(q_next.data()[a] - q_cur.data()[a], 0.0));
    table.sdq.push_back(std::move(s));
    q_cur = std::move(q_next);
  }
  return table;
}

// One Euler step v <- v + h J v + noise_scale * sdq .* xi. The noise term is
// assembled as noise_scale * (xi * sdq) and every addition pairs terms that
// scale together, so doubling noise_scale doubles the whole path bitwise.
void clt_step(const CltTable& table, std::size_t m, double noise_scale, Rng& rng,
              std::vector<double>& v, std::vector<double>& jv) {
  const std::size_t kk = v.size();
  const Mat& jac = table.jac[m];
  for (std::size_t a = 0; a < kk; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < kk; ++b)
      s += jac(static_cast<int>(a), static_cast<int>(b)) * v[b];
    jv[a] = s;
  }
  for (std::size_t a = 0; a < kk; ++a) {
    const double noise = noise_scale * (rng.normal() * table.sdq[m][a]);
    v[a] = v[a] + table.h * jv[a] + noise;
  }
}

std::vector<double> clt_final(const CltTable& table, double noise_scale, Rng& rng) {
  const std::size_t kk = static_cast<std::size_t>(table.k) * static_cast<std::size_t>(table.k);
  std::vector<double> v(kk, 0.0), jv(kk);
  for (std::size_t m = 0; m < table.jac.size(); ++m) clt_step(table, m, noise_scale, rng, v, jv);
  return v;
}

Mat mat_from_flat(int k, const std::vector<double>& flat) {
  Mat m = Mat::square(k);
  m.data() = flat;
  return m;
}

}  // namespace

void project_state(Mat& z, const PopulationFractions& fractions) {
  const int k = z.rows();
  for (double& v : z.data()) v = std::max(v, 0.0);
  for (int i = 0; i < k; ++i) {
    const double r = z.row_sum(i);
    if (r > fractions.x[static_cast<std::size_t>(i)]) {
      const double c = fractions.x[static_cast<std::size_t>(i)] / r;
      for (int j = 0; j < k; ++j) z(i, j) *= c;
    }
  }
  for (int j = 0; j < k; ++j) {
    const double c = z.col_sum(j);
    if (c > fractions.y[static_cast<std::size_t>(j)]) {
      const double s = fractions.y[static_cast<std::size_t>(j)] / c;
      for (int i = 0; i < k; ++i) z(i, j) *= s;
    }
  }
}

namespace {

// Shared Euler-Maruyama loop; next_dw fills the k^2 Brownian increments for
// the step about to be taken.
DiffusionPath diffusion_run(const ModelParams& params, const PopulationFractions& fractions,
                            long n, double h, std::size_t steps, double noise_scale,
                            const std::function<void(std::size_t, std::vector<double>&)>& next_dw) {
  const int k = params.k;
  const std::size_t kk = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  DiffusionPath path;
  path.times.resize(steps + 1);
  path.z.reserve(steps + 1);
  Mat z = Mat::square(k);
  path.times[0] = 0.0;
  path.z.push_back(z);
  std::vector<double> dw(kk);
  for (std::size_t m = 0; m < steps; ++m) {
    const Mat f = drift_F(params, fractions, z);
    next_dw(m, dw);
    for (std::size_t a = 0; a < kk; ++a) {
      // Rounding in the projection can leave a margin short by a few ulps,
      // which makes the drift entry a tiny negative number; treat it as zero.
      const double fa = std::max(f.data()[a], 0.0);
      z.data()[a] += fa * h + noise_scale * std::sqrt(fa * inv_n) * dw[a];
    }
    project_state(z, fractions);
    path.times[m + 1] = static_cast<double>(m + 1) * h;
    path.z.push_back(z);
  }
  path.times[steps] = static_cast<double>(steps) * h;
  return path;
}

void check_population_scale(long n) {
  if (n < 10) throw InvalidPopulation("diffusion approximation needs n >= 10");
}

}  // namespace

BrownianGrid make_brownian_grid(int k, double t_end, std::size_t steps, std::uint64_t seed) {
  if (k < 1) throw DimensionMismatch("need at least one type");
  if (steps < 1) throw InvalidConfig("grid needs at least one step");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw InvalidConfig("horizon must be positive and finite");
  BrownianGrid grid;
  grid.k = k;
  grid.t_end = t_end;
  grid.steps = steps;
  const std::size_t kk = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  grid.dw.resize(steps * kk);
  const double std_dev = std::sqrt(grid.dt());
  Rng rng(seed);
  for (double& w : grid.dw) w = std_dev * rng.normal();
  return grid;
}

FluctuationPath simulate_clt_limit(const ModelParams& params, const PopulationFractions& fractions,
                                   const FluidSolution& fluid, double t_end, double dt,
                                   std::uint64_t seed, double noise_scale) {
  const CltTable table = build_clt_table(params, fractions, fluid, t_end, dt);
  const std::size_t kk =
      static_cast<std::size_t>(table.k) * static_cast<std::size_t>(table.k);
  Rng rng(seed);
  std::vector<double> v(kk, 0.0), jv(kk);
  FluctuationPath path;
  path.times = table.times;
  path.v.reserve(table.times.size());
  path.v.push_back(mat_from_flat(table.k, v));
  for (std::size_t m = 0; m < table.jac.size(); ++m) {
    clt_step(table, m, noise_scale, rng, v, jv);
    path.v.push_back(mat_from_flat(table.k, v));
  }
  return path;
}

DiffusionPath simulate_diffusion(const ModelParams& params, const PopulationFractions& fractions,
                                 long n, double t_end, double dt, std::uint64_t seed,
                                 double noise_scale) {
  check_population_scale(n);
  check_step(t_end, dt);
  const std::size_t steps = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(steps);
  const double std_dev = std::sqrt(h);
  Rng rng(seed);
  auto next_dw = [&](std::size_t, std::vector<double>& dw) {
    for (double& w : dw) w = std_dev * rng.normal();
  };
  DiffusionPath path = diffusion_run(params, fractions, n, h, steps, noise_scale, next_dw);
  path.times.back() = t_end;
  return path;
}

DiffusionPath simulate_diffusion_on_grid(const ModelParams& params,
                                         const PopulationFractions& fractions, long n,
                                         const BrownianGrid& grid, std::size_t stride) {
  check_population_scale(n);
  if (grid.k != params.k) throw DimensionMismatch("grid and parameters disagree on k");
  if (stride < 1 || stride > grid.steps || grid.steps % stride != 0)
    throw InvalidConfig("stride must divide the grid step count");
  const std::size_t kk =
      static_cast<std::size_t>(grid.k) * static_cast<std::size_t>(grid.k);
  if (grid.dw.size() != grid.steps * kk) throw InvalidConfig("grid increment buffer has wrong size");
  const double h = grid.dt() * static_cast<double>(stride);
  check_step(grid.t_end, h);
  const std::size_t steps = grid.steps / stride;
  auto next_dw = [&](std::size_t m, std::vector<double>& dw) {
    std::fill(dw.begin(), dw.end(), 0.0);
    for (std::size_t f = m * stride; f < (m + 1) * stride; ++f)
      for (std::size_t a = 0; a < kk; ++a) dw[a] += grid.dw[f * kk + a];
  };
  DiffusionPath path = diffusion_run(params, fractions, n, h, steps, 1.0, next_dw);
  path.times.back() = grid.t_end;
  return path;
}

FluctuationReport empirical_fluctuations(const ModelParams& params,
                                         const PopulationFractions& fractions, long n,
                                         double t_probe, long replicates, std::uint64_t seed) {
  if (!(t_probe > 0.0) || !std::isfinite(t_probe))
    throw InvalidConfig("probe time must be positive and finite");
  if (replicates < 1000) throw InvalidConfig("need at least 1000 replicates");
  const PopulationCounts counts = round_fractions(fractions, n);
  // Center at the fluid path started from the realized fractions x^n/n, so
  // the rounding residue does not leak an O(1/sqrt(n)) bias into the scaled
  // fluctuation.
  std::vector<double> xn(counts.x.size()), yn(counts.y.size());
  for (std::size_t i = 0; i < xn.size(); ++i)
    xn[i] = static_cast<double>(counts.x[i]) / static_cast<double>(n);
  for (std::size_t j = 0; j < yn.size(); ++j)
    yn[j] = static_cast<double>(counts.y[j]) / static_cast<double>(n);
  const PopulationFractions fr_n = make_fractions(xn, yn);

  const FluidSolution fluid = integrate_fluid(params, fr_n, t_probe, 1e-10);
  const Mat q_probe = fluid.eval(t_probe);
  const std::size_t steps_v =
      std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil(t_probe / 5e-3)));
  const CltTable table =
      build_clt_table(params, fr_n, fluid, t_probe, t_probe / static_cast<double>(steps_v));

  const int k = params.k;
  const std::size_t kk = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  const std::size_t reps = static_cast<std::size_t>(replicates);
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> emp(reps * kk), lim(reps * kk);
  parallel_for(reps, [&](std::size_t r) {
    SimConfig cfg;
    cfg.seed = split_seed(seed, r);
    cfg.t_max = t_probe;
    cfg.record_mode = RecordMode::Snapshots;
    cfg.snapshot_times = {t_probe};
    const SimTrajectory traj = simulate(params, counts, cfg);
    const Mat& snap = traj.snapshots.front().second;
    for (std::size_t a = 0; a < kk; ++a)
      emp[r * kk + a] =
          root_n * (snap.data()[a] / static_cast<double>(n) - q_probe.data()[a]);
  });
  parallel_for(reps, [&](std::size_t r) {
    Rng rng(split_seed(seed, (1ull << 32) + r));
    const std::vector<double> v = clt_final(table, 1.0, rng);
    for (std::size_t a = 0; a < kk; ++a) lim[r * kk + a] = v[a];
  });

  auto covariance = [&](const std::vector<double>& buf, std::vector<double>& mean_out) {
    mean_out.assign(kk, 0.0);
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t a = 0; a < kk; ++a) mean_out[a] += buf[r * kk + a];
    for (double& m : mean_out) m /= static_cast<double>(reps);
    Mat cov(static_cast<int>(kk), static_cast<int>(kk));
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t a = 0; a < kk; ++a) {
        const double da = buf[r * kk + a] - mean_out[a];
        for (std::size_t b = a; b < kk; ++b)
          cov(static_cast<int>(a), static_cast<int>(b)) += da * (buf[r * kk + b] - mean_out[b]);
      }
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t b = a; b < kk; ++b) {
        const double c =
            cov(static_cast<int>(a), static_cast<int>(b)) / static_cast<double>(reps - 1);
        cov(static_cast<int>(a), static_cast<int>(b)) = c;
        cov(static_cast<int>(b), static_cast<int>(a)) = c;
      }
    return cov;
  };

  FluctuationReport report;
  report.n = n;
  report.t = t_probe;
  report.replicates = replicates;
  std::vector<double> mean_lim;
  report.cov_empirical = covariance(emp, report.mean_scaled);
  report.cov_limit = covariance(lim, mean_lim);
  report.rel_diff = Mat(static_cast<int>(kk), static_cast<int>(kk));
  for (int a = 0; a < static_cast<int>(kk); ++a)
    for (int b = 0; b < static_cast<int>(kk); ++b)
      report.rel_diff(a, b) = std::abs(report.cov_empirical(a, b) - report.cov_limit(a, b)) /
                              std::max(std::abs(report.cov_limit(a, b)), 1e-12);
  report.se_scaled.resize(kk);
  for (std::size_t a = 0; a < kk; ++a)
    report.se_scaled[a] = std::sqrt(report.cov_empirical(static_cast<int>(a), static_cast<int>(a)) /
                                    static_cast<double>(reps));
  return report;
}

}  // namespace pairsim
