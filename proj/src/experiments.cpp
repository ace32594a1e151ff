#include "pairsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pairsim/closed_form.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/parallel.hpp"
#include "pairsim/rng.hpp"

namespace pairsim {

namespace {

double scaled_diff(const Mat& m, double inv_n, const Mat& q) {
  double d = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      d = std::max(d, std::abs(m(i, j) * inv_n - q(i, j)));
  return d;
}

}  // namespace

double sup_norm_error(const SimTrajectory& traj, long n, const FluidSolution& fluid,
                      double t_hi) {
  if (n < 1) throw InvalidPopulation("population size must be positive");
  if (!(t_hi > 0.0) || !std::isfinite(t_hi))
    throw InvalidConfig("horizon must be positive and finite");
  if (fluid.t_end() < t_hi)
    throw MissingFluidSolution("fluid solution does not cover the requested horizon");
  const int k = fluid.eval(0.0).rows();
  if (traj.events.empty() && traj.pattern.total() != 0.0)
    throw InvalidConfig("trajectory has no events; record it in FullPath mode");
  const double inv_n = 1.0 / static_cast<double>(n);
  Mat m = Mat::square(k);
  double sup = 0.0;
  for (const SimEvent& e : traj.events) {
    if (e.t > t_hi) break;
    const Mat q = fluid.eval(e.t);
    sup = std::max(sup, scaled_diff(m, inv_n, q));
    m(e.i, e.j) += 1.0;
    sup = std::max(sup, scaled_diff(m, inv_n, q));
  }
  sup = std::max(sup, scaled_diff(m, inv_n, fluid.eval(t_hi)));
  return sup;
}

std::vector<ConvergenceRow> convergence_study(const ModelParams& params,
                                              const PopulationFractions& fractions,
                                              const std::vector<long>& n_list, int n_seeds,
                                              std::uint64_t base_seed, double t_hi) {
  if (n_list.empty()) throw InvalidConfig("need at least one population size");
  if (n_seeds < 1) throw InvalidConfig("need at least one seed");
  const FluidSolution fluid = integrate_fluid(params, fractions, t_hi, 1e-8);
  const std::size_t width = n_list.size();
  std::vector<ConvergenceRow> rows(static_cast<std::size_t>(n_seeds) * width);
  parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t s) {
    SimConfig cfg;
    cfg.seed = split_seed(base_seed, s);
    cfg.t_max = t_hi;
    cfg.record_mode = RecordMode::FullPath;
    const std::vector<SimTrajectory> trajs = simulate_coupled(params, fractions, n_list, cfg);
    for (std::size_t li = 0; li < width; ++li)
      rows[s * width + li] = {n_list[li], cfg.seed,
                              sup_norm_error(trajs[li], n_list[li], fluid, t_hi)};
  });
  return rows;
}

LevelCurveGrid levelcurves_grid(double lo, double hi, int steps, double pi12, double x1) {
  if (steps < 2) throw InvalidConfig("grid needs at least two points per axis");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidConfig("grid range must satisfy lo < hi");
  if (!(pi12 > 0.0)) throw DegenerateRate("off-diagonal rate must be positive");
  if (!(x1 > 0.0) || !(x1 < 1.0)) throw DomainError("x1 must lie strictly inside (0, 1)");
  constexpr double kFloor = 1e-8;  // positivity floor; the limit extends continuously
  LevelCurveGrid grid;
  grid.pi12 = pi12;
  grid.x1 = x1;
  grid.values.resize(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i)
    grid.values[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  grid.q12 = Mat(steps, steps);
  const PopulationFractions fr = make_fractions({x1, 1.0 - x1}, {x1, 1.0 - x1});
  parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
    for (int j = 0; j < steps; ++j) {
      Mat pi = Mat::square(2);
      pi(0, 0) = std::max(grid.values[i], kFloor);
      pi(0, 1) = pi12;
      pi(1, 0) = pi12;
      pi(1, 1) = std::max(grid.values[static_cast<std::size_t>(j)], kFloor);
      const ModelParams params = params_from_pi(pi);
      const Sym2x2Params red = sym2x2_reduce(params, fr);
      grid.q12(static_cast<int>(i), j) = red.case_tag == SymCase::FineBalance
                                             ? x1 * (1.0 - x1)
                                             : Sym2x2Solution(params, fr).q12_infinity();
    }
  });
  return grid;
}

}  // namespace pairsim
