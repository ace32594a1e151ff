#include "pairsim/dynamics.hpp"

#include <cmath>

#include "pairsim/errors.hpp"

namespace pairsim {

namespace {

void validate_fr(const ModelParams& params, const PopulationFractions& fractions) {
  if (static_cast<int>(fractions.x.size()) != params.k)
    throw DimensionMismatch("fractions and parameters disagree on k");
}

double quadratic_form(const Mat& pi, const std::vector<double>& a,
                      const std::vector<double>& b) {
  double s = 0.0;
  for (int i = 0; i < pi.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < pi.cols(); ++j) row += pi(i, j) * b[static_cast<std::size_t>(j)];
    s += a[static_cast<std::size_t>(i)] * row;
  }
  return s;
}

}  // namespace

SinglesState to_singles(const PopulationFractions& fractions, const Mat& q) {
  const int k = static_cast<int>(fractions.x.size());
  if (q.rows() != k || q.cols() != k) throw InvalidState("state has wrong shape");
  if (!in_state_space(q, fractions, 1e-9)) throw InvalidState("state outside the constraint set");
  SinglesState s;
  s.X.resize(static_cast<std::size_t>(k));
  s.Y.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    s.X[static_cast<std::size_t>(i)] = fractions.x[static_cast<std::size_t>(i)] - q.row_sum(i);
  for (int j = 0; j < k; ++j)
    s.Y[static_cast<std::size_t>(j)] = fractions.y[static_cast<std::size_t>(j)] - q.col_sum(j);
  s.Z = 1.0 - q.total();
  if (s.Z <= 1e-14) throw Absorbed("all mass is matched; profiles are undefined");
  s.A.resize(static_cast<std::size_t>(k));
  s.B.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) s.A[static_cast<std::size_t>(i)] = s.X[static_cast<std::size_t>(i)] / s.Z;
  for (int j = 0; j < k; ++j) s.B[static_cast<std::size_t>(j)] = s.Y[static_cast<std::size_t>(j)] / s.Z;
  return s;
}

std::pair<std::vector<double>, std::vector<double>> lv_vector_field(const ModelParams& params,
                                                                    const SinglesState& state) {
  if (static_cast<int>(state.X.size()) != params.k ||
      static_cast<int>(state.Y.size()) != params.k)
    throw DimensionMismatch("singles state and parameters disagree on k");
  if (!(state.Z > 0.0)) throw SingularZ("Z must be positive");
  const int k = params.k;
  std::vector<double> dx(static_cast<std::size_t>(k)), dy(static_cast<std::size_t>(k));
  double inv_z = 1.0 / state.Z;
  for (int i = 0; i < k; ++i) {
    double rate = 0.0;
    for (int j = 0; j < k; ++j) rate += params.pi(i, j) * state.Y[static_cast<std::size_t>(j)];
    dx[static_cast<std::size_t>(i)] = -state.X[static_cast<std::size_t>(i)] * rate * inv_z;
  }
  for (int j = 0; j < k; ++j) {
    double rate = 0.0;
    for (int i = 0; i < k; ++i) rate += params.pi(i, j) * state.X[static_cast<std::size_t>(i)];
    dy[static_cast<std::size_t>(j)] = -state.Y[static_cast<std::size_t>(j)] * rate * inv_z;
  }
  return {dx, dy};
}

std::vector<double> replicator_vector_field(const ModelParams& params,
                                            const std::vector<double>& c) {
  const int k = params.k;
  if (static_cast<int>(c.size()) != 2 * k)
    throw DimensionMismatch("replicator state must have 2k entries");
  double sum = 0.0;
  for (double v : c) {
    if (v < -1e-12) throw InvalidSimplexPoint("negative simplex coordinate");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-8) throw InvalidSimplexPoint("simplex coordinates must sum to 1");
  // Fitness (Phat c)_u: females see Pi c_B, males see Pi^T c_A.
  std::vector<double> fit(static_cast<std::size_t>(2 * k), 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) fit[static_cast<std::size_t>(i)] += params.pi(i, j) * c[static_cast<std::size_t>(k + j)];
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) fit[static_cast<std::size_t>(k + j)] += params.pi(i, j) * c[static_cast<std::size_t>(i)];
  double avg = 0.0;
  for (int u = 0; u < 2 * k; ++u) avg += c[static_cast<std::size_t>(u)] * fit[static_cast<std::size_t>(u)];
  std::vector<double> dc(static_cast<std::size_t>(2 * k));
  for (int u = 0; u < 2 * k; ++u)
    dc[static_cast<std::size_t>(u)] =
        -2.0 * c[static_cast<std::size_t>(u)] * (fit[static_cast<std::size_t>(u)] - avg);
  return dc;
}

double z_vector_field(const ModelParams& params, const std::vector<double>& a,
                      const std::vector<double>& b, double z) {
  if (static_cast<int>(a.size()) != params.k || static_cast<int>(b.size()) != params.k)
    throw DimensionMismatch("profiles must have k entries");
  return -z * quadratic_form(params.pi, a, b);
}

Mat reconstruct_q_rate(const ModelParams& params, const std::vector<double>& a,
                       const std::vector<double>& b, double z) {
  if (static_cast<int>(a.size()) != params.k || static_cast<int>(b.size()) != params.k)
    throw DimensionMismatch("profiles must have k entries");
  const int k = params.k;
  Mat r = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      r(i, j) = params.pi(i, j) * z * a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
  return r;
}

FluidSolution integrate_replicator(const ModelParams& params,
                                   const PopulationFractions& fractions, double t_end,
                                   double rtol) {
  validate_fr(params, fractions);
  if (!(t_end > 0.0)) throw InvalidConfig("t_end must be positive");
  if (!(rtol > 0.0) || rtol > 1e-2) throw InvalidConfig("rtol must lie in (0, 1e-2]");
  const int k = params.k;
  const std::size_t ka = static_cast<std::size_t>(k);
  // State layout: A (k), B (k), Z (1), Q (k^2).
  ode::Vec y0(2 * ka + 1 + ka * ka, 0.0);
  for (int i = 0; i < k; ++i) y0[static_cast<std::size_t>(i)] = fractions.x[static_cast<std::size_t>(i)];
  for (int j = 0; j < k; ++j) y0[ka + static_cast<std::size_t>(j)] = fractions.y[static_cast<std::size_t>(j)];
  y0[2 * ka] = 1.0;

  ode::RhsFn rhs = [&params, k, ka](double, const ode::Vec& y, ode::Vec& dy) {
    const double* a = y.data();
    const double* b = y.data() + ka;
    const double z = y[2 * ka];
    double avg = 0.0;
    std::vector<double> fa(ka, 0.0), fb(ka, 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double pij = params.pi(i, j);
        fa[static_cast<std::size_t>(i)] += pij * b[j];
        fb[static_cast<std::size_t>(j)] += pij * a[i];
      }
    for (int i = 0; i < k; ++i) avg += a[i] * fa[static_cast<std::size_t>(i)];
    for (int i = 0; i < k; ++i)
      dy[static_cast<std::size_t>(i)] = -a[i] * (fa[static_cast<std::size_t>(i)] - avg);
    for (int j = 0; j < k; ++j)
      dy[ka + static_cast<std::size_t>(j)] = -b[j] * (fb[static_cast<std::size_t>(j)] - avg);
    dy[2 * ka] = -z * avg;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        dy[2 * ka + 1 + static_cast<std::size_t>(i * k + j)] = params.pi(i, j) * z * a[i] * b[j];
  };
  // Keep A and B on the simplex: clamp tiny negatives and renormalize.
  ode::PostStepFn renorm = [k, ka](double, ode::Vec& y) {
    for (int block = 0; block < 2; ++block) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        std::size_t u = static_cast<std::size_t>(block) * ka + static_cast<std::size_t>(i);
        if (y[u] < 0.0) y[u] = 0.0;
        sum += y[u];
      }
      for (int i = 0; i < k; ++i) y[static_cast<std::size_t>(block) * ka + static_cast<std::size_t>(i)] /= sum;
    }
  };
  ode::Options opt;
  opt.rtol = rtol;
  opt.atol = rtol * 1e-2;
  ode::Result full = ode::integrate(rhs, std::move(y0), 0.0, t_end, opt, {}, renorm);

  // Project the stored nodes onto the Q block for the fluid view.
  ode::Result qpart;
  qpart.ts = full.ts;
  qpart.stopped = full.stopped;
  qpart.ys.reserve(full.ys.size());
  qpart.fs.reserve(full.fs.size());
  for (std::size_t s = 0; s < full.ys.size(); ++s) {
    qpart.ys.emplace_back(full.ys[s].begin() + static_cast<long>(2 * ka + 1), full.ys[s].end());
    qpart.fs.emplace_back(full.fs[s].begin() + static_cast<long>(2 * ka + 1), full.fs[s].end());
  }
  double t_last = qpart.ts.empty() ? t_end : qpart.ts.back();
  return FluidSolution(k, std::move(qpart), t_last);
}

}  // namespace pairsim
