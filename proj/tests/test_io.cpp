#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>

#include "pairsim/errors.hpp"
#include "pairsim/io_json.hpp"

using namespace pairsim;

namespace {

Mat pi_mat(double p11, double p12, double p21, double p22) {
  Mat pi = Mat::square(2);
  pi(0, 0) = p11;
  pi(0, 1) = p12;
  pi(1, 0) = p21;
  pi(1, 1) = p22;
  return pi;
}

}  // namespace

TEST_CASE("parameters parse from both accepted forms") {
  const Json direct = Json::parse(R"({"pi": [[2.0, 1.0], [1.0, 3.0]]})");
  const ModelParams a = params_from_json(direct);
  CHECK(a.k == 2);
  CHECK(a.pi(0, 0) == 2.0);
  CHECK(a.pi(1, 1) == 3.0);

  const Json factored = Json::parse(
      R"({"alpha": [1.0, 2.0], "beta": [0.5, 0.5], "p": [[1.0, 0.5], [0.5, 1.0]]})");
  const ModelParams b = params_from_json(factored);
  CHECK(b.pi(0, 0) == doctest::Approx(1.5));
  CHECK(b.pi(0, 1) == doctest::Approx(0.75));
  CHECK(b.pi(1, 0) == doctest::Approx(1.25));
  CHECK(b.pi(1, 1) == doctest::Approx(2.5));

  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"pi": [[1]], "alpha": [1]})")),
                  InvalidConfig);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"alpha": [1, 2]})")), InvalidConfig);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"pi": [[1, 2], [3]]})")), InvalidConfig);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"pi": [[1, "x"], [3, 4]]})")),
                  InvalidConfig);
  CHECK_THROWS_AS(params_from_json(Json::parse("[1, 2]")), InvalidConfig);
}

TEST_CASE("population parses counts and fractions") {
  const PopulationSpec counts =
      population_from_json(Json::parse(R"({"n": 10, "x": [4, 6], "y": [5, 5]})"));
  REQUIRE(counts.counts.has_value());
  CHECK(counts.counts->n == 10);
  const PopulationFractions fr = counts.as_fractions();
  CHECK(fr.x[0] == doctest::Approx(0.4));
  CHECK(fr.y[1] == doctest::Approx(0.5));
  CHECK(counts.as_counts(0).n == 10);
  CHECK(counts.as_counts(10).n == 10);
  CHECK_THROWS_AS(counts.as_counts(20), InvalidPopulation);

  const PopulationSpec frac =
      population_from_json(Json::parse(R"({"x_frac": [0.3, 0.7], "y_frac": [0.5, 0.5]})"));
  REQUIRE(frac.fractions.has_value());
  const PopulationCounts rounded = frac.as_counts(10);
  CHECK(rounded.x[0] == 3);
  CHECK(rounded.x[1] == 7);
  CHECK_THROWS_AS(frac.as_counts(0), InvalidPopulation);

  CHECK_THROWS_AS(population_from_json(Json::parse(R"({"n": 4, "x": [4], "y": [3]})")),
                  ValidationError);
  CHECK_THROWS_AS(
      population_from_json(Json::parse(R"({"n": 5, "x": [4, 6], "y": [5, 5]})")),
      InvalidPopulation);
  CHECK_THROWS_AS(
      population_from_json(Json::parse(R"({"x": [1], "y": [1], "x_frac": [1.0]})")),
      InvalidConfig);
  CHECK_THROWS_AS(population_from_json(Json::parse(R"({})")), InvalidConfig);
  CHECK_THROWS_AS(
      population_from_json(Json::parse(R"({"n": 2, "x": [1.5], "y": [2]})")),
      InvalidConfig);
}

TEST_CASE("matrix round trips through json") {
  const Mat m = pi_mat(0.25, 1.0, -3.5, 7.0);
  const Mat back = mat_from_json(mat_to_json(m));
  CHECK(max_abs_diff(m, back) == 0.0);
  CHECK_THROWS_AS(mat_from_json(Json::parse("[]")), InvalidConfig);
  CHECK_THROWS_AS(mat_from_json(Json::parse("[[]]")), InvalidConfig);
}

TEST_CASE("trajectory serialization uses 1-based types") {
  SimTrajectory traj;
  traj.events = {{0.5, 0, 1}, {1.25, 1, 0}};
  traj.pattern = pi_mat(0.0, 1.0, 1.0, 0.0);
  traj.t_absorb = 1.25;

  CHECK(trajectory_to_csv(traj) == "t,i,j\n0.5,1,2\n1.25,2,1\n");

  const Json j = trajectory_to_json(traj);
  CHECK(j.at("events").size() == 2);
  CHECK(j.at("events").at(0).at(1) == 1);
  CHECK(j.at("events").at(0).at(2) == 2);
  CHECK(j.at("t_absorb") == 1.25);
  CHECK(j.at("pattern").at(0).at(1) == 1.0);

  traj.t_absorb.reset();
  CHECK(trajectory_to_json(traj).at("t_absorb").is_null());
}

TEST_CASE("fluid trajectory exports one row per node") {
  const ModelParams params = params_from_pi(pi_mat(2.0, 1.0, 1.0, 3.0));
  const PopulationFractions fr = make_fractions({0.4, 0.6}, {0.3, 0.7});
  const FluidSolution fluid = integrate_fluid(params, fr, 1.0);

  const std::string csv = fluid_to_csv(fluid);
  CHECK(csv.rfind("t,Q11,Q12,Q21,Q22\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == fluid.node_count() + 1);
  CHECK(csv.find("\n0,0,0,0,0\n") != std::string::npos);
}

TEST_CASE("report serializers emit the documented fields") {
  const Mat pattern = pi_mat(0.12, 0.18, 0.28, 0.42);
  const Json pat = pattern_report_to_json(pattern, 1e-8);
  CHECK(pat.at("error_bound") == 1e-8);
  CHECK(pat.at("pattern").at(1).at(1) == 0.42);

  FineBalanceDecomposition d;
  d.alpha_bar = {0.0, 1.0};
  d.beta_bar = {2.0, 3.0};
  const Json fb = fine_balance_to_json(d);
  CHECK(fb.at("alpha_bar").at(0) == 0.0);
  CHECK(fb.at("beta_bar").at(1) == 3.0);

  const ModelParams params = params_from_pi(pi_mat(3.0, 1.0, 1.0, 2.0));
  const PopulationFractions fr = make_fractions({0.35, 0.65}, {0.35, 0.65});
  const Sym2x2Solution sol(params, fr);
  const Json rep = sym2x2_report_to_json(sol);
  CHECK(rep.at("case") == "generic");
  CHECK(rep.at("gamma").get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(rep.at("theta1").get<double>() == doctest::Approx(1.0));
  CHECK(rep.at("theta2").get<double>() == doctest::Approx(0.5));
  CHECK(rep.at("class") == "homogamous");
  CHECK(rep.at("q12_inf").get<double>() > 0.0);
  const Json patt = rep.at("pattern");
  CHECK(patt.at(0).at(0).get<double>() + patt.at(0).at(1).get<double>() ==
        doctest::Approx(0.35));

  const ModelParams go = params_from_pi(pi_mat(1.0, 1.0, 1.0, 2.0));
  const Sym2x2Solution gsol(go, fr);
  const Json grep = sym2x2_report_to_json(gsol);
  CHECK(grep.at("case") == "gamma-one");
  CHECK(grep.at("theta2").is_null());
}

TEST_CASE("fluctuation report serializes as documented") {
  Mat one = Mat::square(1);
  one(0, 0) = 1.0;
  const ModelParams params = params_from_pi(one);
  const PopulationFractions fr = make_fractions({1.0}, {1.0});
  const FluctuationReport report = empirical_fluctuations(params, fr, 200, 0.5, 1000, 3);

  const Json j = clt_report_to_json(report);
  CHECK(j.at("n") == 200);
  CHECK(j.at("t") == 0.5);
  CHECK(j.at("replicates") == 1000);
  CHECK(j.at("cov_empirical").at(0).at(0).get<double>() > 0.0);
  CHECK(j.at("cov_limit").at(0).at(0).get<double>() > 0.0);
  CHECK(j.at("rel_diff").at(0).at(0).get<double>() >= 0.0);
  CHECK(j.at("mean_scaled").size() == 1);
  CHECK(j.at("se_scaled").size() == 1);
}

TEST_CASE("table exports carry their headers") {
  std::vector<ConvergenceRow> rows = {{100, 42, 0.25}, {1000, 42, 0.0625}};
  CHECK(convergence_to_csv(rows) == "n,seed,sup_error\n100,42,0.25\n1000,42,0.0625\n");

  const LevelCurveGrid grid = levelcurves_grid(0.4, 0.6, 2, 0.5, 0.5);
  const std::string csv = levelcurves_to_csv(grid);
  CHECK(csv.rfind("pi11,pi22,q12\n", 0) == 0);
  CHECK(csv.find("0.4,0.6,") != std::string::npos);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 5);
}

TEST_CASE("files round trip and parse failures are validation errors") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "pairsim_io_test.json").string();
  const Json doc = Json::parse(R"({"pi": [[2.0, 1.0], [1.0, 3.0]]})");
  write_text_file(path, dump_json(doc));
  const Json back = load_json_file(path);
  CHECK(back == doc);
  CHECK(dump_json(back) == dump_json(doc));
  CHECK(dump_json(back).back() == '\n');

  write_text_file(path, "{not json");
  CHECK_THROWS_AS(load_json_file(path), InvalidConfig);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_json_file(path), InvalidConfig);
}
