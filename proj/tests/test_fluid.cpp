#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pairsim/errors.hpp"
#include "pairsim/fluid.hpp"
#include "pairsim/model.hpp"
#include "pairsim/rng.hpp"

using namespace pairsim;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

// Random interior state: M_ij = s * x_i * y_j * u_ij keeps every margin
// strictly inside the constraint set.
Mat random_interior_state(const PopulationFractions& fr, Rng& rng, double scale = 0.6) {
  const int k = static_cast<int>(fr.x.size());
  Mat m = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      m(i, j) = scale * fr.x[static_cast<std::size_t>(i)] * fr.y[static_cast<std::size_t>(j)] *
                rng.uniform();
  return m;
}

PopulationFractions random_fractions(int k, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(k)), y(static_cast<std::size_t>(k));
  double sx = 0, sy = 0;
  for (int i = 0; i < k; ++i) {
    x[static_cast<std::size_t>(i)] = 0.05 + rng.uniform();
    y[static_cast<std::size_t>(i)] = 0.05 + rng.uniform();
    sx += x[static_cast<std::size_t>(i)];
    sy += y[static_cast<std::size_t>(i)];
  }
  double rx = 0, ry = 0;
  for (int i = 0; i + 1 < k; ++i) {
    x[static_cast<std::size_t>(i)] /= sx;
    y[static_cast<std::size_t>(i)] /= sy;
    rx += x[static_cast<std::size_t>(i)];
    ry += y[static_cast<std::size_t>(i)];
  }
  x[static_cast<std::size_t>(k - 1)] = 1.0 - rx;
  y[static_cast<std::size_t>(k - 1)] = 1.0 - ry;
  return make_fractions(x, y);
}

Mat random_pi(int k, Rng& rng, double lo = 0.1, double hi = 2.0) {
  Mat pi = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) pi(i, j) = lo + (hi - lo) * rng.uniform();
  return pi;
}

}  // namespace

TEST_CASE("drift at the empty state and its cap") {
  ModelParams m = params_from_pi(mat2(2.0, 1.0, 1.0, 3.0));
  PopulationFractions fr = make_fractions({0.3, 0.7}, {0.4, 0.6});
  Mat f = drift_F(m, fr, Mat::square(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(f(i, j) == doctest::Approx(m.pi(i, j) * fr.x[static_cast<std::size_t>(i)] *
                                       fr.y[static_cast<std::size_t>(j)]));
  // F_ij <= pi_ij * min(x_i, y_j) everywhere.
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    Mat state = random_interior_state(fr, rng);
    Mat fd = drift_F(m, fr, state);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double cap = m.pi(i, j) * std::min(fr.x[static_cast<std::size_t>(i)],
                                           fr.y[static_cast<std::size_t>(j)]);
        CHECK(fd(i, j) >= 0.0);
        CHECK(fd(i, j) <= cap + 1e-12);
      }
  }
}

TEST_CASE("drift validates the state") {
  ModelParams m = params_from_pi(mat2(2.0, 1.0, 1.0, 3.0));
  PopulationFractions fr = make_fractions({0.3, 0.7}, {0.4, 0.6});
  Mat neg = mat2(-0.05, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(drift_F(m, fr, neg), InvalidState);
  Mat over = mat2(0.2, 0.2, 0.0, 0.0);
  CHECK_THROWS_AS(drift_F(m, fr, over), InvalidState);
  CHECK_THROWS_AS(drift_F(m, fr, Mat::square(3)), InvalidState);
}

TEST_CASE("jacobian at the empty state matches the closed expression") {
  ModelParams m = params_from_pi(mat2(2.0, 1.0, 1.0, 3.0));
  PopulationFractions fr = make_fractions({0.3, 0.7}, {0.4, 0.6});
  Mat jac = jacobian_F(m, fr, Mat::square(2));
  const int k = 2;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int i2 = 0; i2 < k; ++i2)
        for (int j2 = 0; j2 < k; ++j2) {
          double expect = fr.x[static_cast<std::size_t>(i)] * fr.y[static_cast<std::size_t>(j)];
          if (j2 == j) expect -= fr.x[static_cast<std::size_t>(i)];
          if (i2 == i) expect -= fr.y[static_cast<std::size_t>(j)];
          expect *= m.pi(i, j);
          CHECK(jac(i * k + j, i2 * k + j2) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("jacobian matches central finite differences") {
  Rng rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    int k = 1 + static_cast<int>(rng.next_u64() % 3);
    ModelParams m = params_from_pi(random_pi(k, rng));
    PopulationFractions fr = random_fractions(k, rng);
    Mat state = random_interior_state(fr, rng, 0.5);
    Mat jac = jacobian_F(m, fr, state);
    const double h = 1e-6;
    for (int i2 = 0; i2 < k; ++i2)
      for (int j2 = 0; j2 < k; ++j2) {
        Mat up = state, dn = state;
        up(i2, j2) += h;
        dn(i2, j2) -= h;
        Mat fu = drift_F(m, fr, up), fd = drift_F(m, fr, dn);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            double fdiff = (fu(i, j) - fd(i, j)) / (2.0 * h);
            CHECK(std::abs(jac(i * k + j, i2 * k + j2) - fdiff) <= 1e-6);
          }
      }
  }
}

TEST_CASE("jacobian entries are bounded by pi (scaled residuals in [0,1])") {
  // |dF_ij/dM_i'j'| <= pi_ij on the constraint set.
  Rng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    int k = 2 + static_cast<int>(rng.next_u64() % 2);
    ModelParams m = params_from_pi(random_pi(k, rng));
    PopulationFractions fr = random_fractions(k, rng);
    Mat state = random_interior_state(fr, rng, 0.8);
    Mat jac = jacobian_F(m, fr, state);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int c = 0; c < k * k; ++c)
          CHECK(std::abs(jac(i * k + j, c)) <= m.pi(i, j) + 1e-9);
  }
}

TEST_CASE("fluid solution of a fine-balance system matches the product formula") {
  // pi_ij = alpha_bar_i + beta_bar_j solves to
  // Q_ij(t) = x_i y_j (1 - exp(-pi_ij t)).
  ModelParams m = params_from_pi(mat2(2.0, 3.0, 3.0, 4.0));
  PopulationFractions fr = make_fractions({0.3, 0.7}, {0.4, 0.6});
  FluidSolution sol = integrate_fluid(m, fr, 5.0, 1e-10);
  for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 3.7, 5.0}) {
    Mat q = sol.eval(t);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double expect = fr.x[static_cast<std::size_t>(i)] * fr.y[static_cast<std::size_t>(j)] *
                        (1.0 - std::exp(-m.pi(i, j) * t));
        CHECK(std::abs(q(i, j) - expect) <= 1e-8);
      }
  }
}

TEST_CASE("k = 1 fluid solution is 1 - exp(-pi t)") {
  Mat pi(1, 1, 1.7);
  ModelParams m = params_from_pi(pi);
  PopulationFractions fr = make_fractions({1.0}, {1.0});
  FluidSolution sol = integrate_fluid(m, fr, 4.0, 1e-10);
  for (double t : {0.3, 1.0, 2.5, 4.0})
    CHECK(sol.eval(t)(0, 0) == doctest::Approx(1.0 - std::exp(-1.7 * t)).epsilon(1e-8));
}

TEST_CASE("fluid trajectories are monotone and respect margins") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    int k = 1 + static_cast<int>(rng.next_u64() % 3);
    ModelParams m = params_from_pi(random_pi(k, rng));
    PopulationFractions fr = random_fractions(k, rng);
    double rtol = 1e-8;
    FluidSolution sol = integrate_fluid(m, fr, 6.0, rtol);
    Mat prev = sol.at_node(0);
    for (std::size_t s = 1; s < sol.node_count(); ++s) {
      Mat cur = sol.at_node(s);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) CHECK(cur(i, j) >= prev(i, j) - 10.0 * rtol);
      CHECK(in_state_space(cur, fr, 10.0 * rtol));
      prev = cur;
    }
    // Exponential envelope for the total mass.
    double c1 = m.pi.min_value(), c2 = m.pi.max_abs();
    for (double t : {0.5, 1.0, 2.0, 4.0, 6.0}) {
      double qt = sol.eval(t).total();
      CHECK(qt >= 1.0 - std::exp(-c1 * t) - 1e-6);
      CHECK(qt <= 1.0 - std::exp(-c2 * t) + 1e-6);
    }
  }
}

TEST_CASE("mating pattern limit reaches the requested residual") {
  ModelParams m = params_from_pi(mat2(2.0, 3.0, 3.0, 4.0));
  PopulationFractions fr = make_fractions({0.3, 0.7}, {0.4, 0.6});
  auto [q, err] = mating_pattern_limit(m, fr, 1e-8);
  CHECK(err <= 1e-8);
  CHECK(err >= 0.0);
  // Fine balance: the limit pattern is the product x_i y_j.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(q(i, j) - fr.x[static_cast<std::size_t>(i)] *
                                   fr.y[static_cast<std::size_t>(j)]) <= 1e-6);
}

TEST_CASE("uniform pi keeps the envelope tight without tripping the bound") {
  // c1 = c2 makes the absorption envelope an equality, the hardest case for
  // the runtime bound assertion.
  Mat pi = mat2(1.3, 1.3, 1.3, 1.3);
  ModelParams m = params_from_pi(pi);
  PopulationFractions fr = make_fractions({0.5, 0.5}, {0.25, 0.75});
  CHECK_NOTHROW(integrate_fluid(m, fr, 10.0, 1e-8));
  auto [q, err] = mating_pattern_limit(m, fr, 1e-8, 1e-10);
  CHECK(err <= 1e-8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(q(i, j) - fr.x[static_cast<std::size_t>(i)] *
                                   fr.y[static_cast<std::size_t>(j)]) <= 1e-6);
}

TEST_CASE("fluid error bound equals the unmatched mass at t_end") {
  ModelParams m = params_from_pi(mat2(3.0, 1.0, 1.0, 2.0));
  PopulationFractions fr = make_fractions({0.5, 0.5}, {0.5, 0.5});
  FluidSolution sol = integrate_fluid(m, fr, 3.0, 1e-9);
  CHECK(sol.error_bound() == doctest::Approx(1.0 - sol.eval(3.0).total()).epsilon(1e-12));
  CHECK(sol.error_bound() > 0.0);
  CHECK(sol.error_bound() < 1.0);
}

TEST_CASE("fluid integration rejects bad tolerances") {
  ModelParams m = params_from_pi(mat2(3.0, 1.0, 1.0, 2.0));
  PopulationFractions fr = make_fractions({0.5, 0.5}, {0.5, 0.5});
  CHECK_THROWS_AS(integrate_fluid(m, fr, -1.0, 1e-8), InvalidConfig);
  CHECK_THROWS_AS(integrate_fluid(m, fr, 1.0, 0.0), InvalidConfig);
  CHECK_THROWS_AS(integrate_fluid(m, fr, 1.0, 0.5), InvalidConfig);
  CHECK_THROWS_AS(mating_pattern_limit(m, fr, 0.0), InvalidConfig);
  CHECK_THROWS_AS(mating_pattern_limit(m, fr, 2.0), InvalidConfig);
}
