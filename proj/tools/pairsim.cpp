#include <cstdint>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pairsim/errors.hpp"
#include "pairsim/experiments.hpp"
#include "pairsim/io_json.hpp"

namespace {

using namespace pairsim;

// Options shared by the file-driven subcommands. Only one subcommand parses
// per invocation, so a single instance is safe to share.
struct Inputs {
  std::string params_path;
  std::string population_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
};

void add_params_options(CLI::App* sub, Inputs& in) {
  sub->add_option("--params", in.params_path, "parameter JSON file")->required();
  sub->add_option("--set", in.overrides,
                  "override a value in the parameter file, e.g. --set /pi/0/0=2.5");
  sub->add_option("--out", in.out_path, "output path (default: stdout)");
}

void add_population_option(CLI::App* sub, Inputs& in, bool required) {
  CLI::Option* opt =
      sub->add_option("--population", in.population_path, "population JSON file");
  if (required) opt->required();
}

Json load_params_doc(const Inputs& in) {
  Json doc = load_json_file(in.params_path);
  for (const std::string& kv : in.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || kv.empty() || kv[0] != '/')
      throw InvalidConfig("--set expects /json/pointer=value, got \"" + kv + "\"");
    Json value;
    try {
      value = Json::parse(kv.substr(eq + 1));
    } catch (const Json::parse_error&) {
      throw InvalidConfig("--set value is not valid JSON: \"" + kv.substr(eq + 1) + "\"");
    }
    try {
      doc[Json::json_pointer(kv.substr(0, eq))] = value;
    } catch (const Json::exception& e) {
      throw InvalidConfig(std::string("--set pointer failed: ") + e.what());
    }
  }
  return doc;
}

PopulationSpec load_population(const Inputs& in) {
  return population_from_json(load_json_file(in.population_path));
}

void emit(const Inputs& in, const std::string& content) {
  if (in.out_path.empty())
    std::cout << content;
  else
    write_text_file(in.out_path, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson encounter-mating model: simulation, fluid limits, closed forms"};
  app.require_subcommand(1);

  Inputs in;

  long sim_n = 0;
  double sim_t_end = std::numeric_limits<double>::infinity();
  bool as_json = false;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "one exact trajectory of the finite-population chain");
  add_params_options(simulate_cmd, in);
  add_population_option(simulate_cmd, in, true);
  simulate_cmd->add_option("--seed", in.seed, "RNG seed");
  simulate_cmd->add_option("--n", sim_n, "population size (for fractions input)");
  simulate_cmd->add_option("--t-end", sim_t_end, "stop time (default: run to absorption)");
  simulate_cmd->add_flag("--json", as_json, "emit JSON instead of CSV");

  double fluid_t_end = 3.0;
  double fluid_rtol = 1e-8;
  CLI::App* fluid_cmd = app.add_subcommand("fluid", "fluid-limit trajectory as CSV");
  add_params_options(fluid_cmd, in);
  add_population_option(fluid_cmd, in, true);
  fluid_cmd->add_option("--t-end", fluid_t_end, "integration horizon")->capture_default_str();
  fluid_cmd->add_option("--rtol", fluid_rtol, "integrator relative tolerance")
      ->capture_default_str();

  double eps = 1e-8;
  double pattern_rtol = 1e-10;
  CLI::App* pattern_cmd =
      app.add_subcommand("pattern", "limit mating pattern with a certified error bound");
  add_params_options(pattern_cmd, in);
  add_population_option(pattern_cmd, in, true);
  pattern_cmd->add_option("--eps", eps, "unmatched-mass tolerance for the limit")
      ->capture_default_str();
  pattern_cmd->add_option("--rtol", pattern_rtol, "integrator relative tolerance")
      ->capture_default_str();

  CLI::App* classify_cmd =
      app.add_subcommand("classify", "trichotomy class of a symmetric 2x2 system");
  add_params_options(classify_cmd, in);

  CLI::App* fb_cmd = app.add_subcommand(
      "fine-balance", "additive decomposition of the rates, if one exists");
  add_params_options(fb_cmd, in);

  double sym_x1 = 0.5;
  CLI::App* sym_cmd =
      app.add_subcommand("sym2x2", "closed-form report for a symmetric 2x2 system");
  add_params_options(sym_cmd, in);
  add_population_option(sym_cmd, in, false);
  sym_cmd->add_option("--x1", sym_x1, "type-1 fraction when no population file is given")
      ->capture_default_str();

  std::vector<long> n_list;
  long conv_seeds = 10;
  double conv_t_end = 3.0;
  CLI::App* converge_cmd = app.add_subcommand(
      "converge", "coupled simulations across population sizes vs the fluid path");
  add_params_options(converge_cmd, in);
  add_population_option(converge_cmd, in, true);
  converge_cmd->add_option("--n-list", n_list, "population sizes")
      ->delimiter(',')
      ->required();
  converge_cmd->add_option("--replicates", conv_seeds, "seeds per size")
      ->capture_default_str();
  converge_cmd->add_option("--t-end", conv_t_end, "comparison horizon")->capture_default_str();
  converge_cmd->add_option("--seed", in.seed, "base RNG seed");

  long clt_n = 10000;
  double clt_t = 1.0;
  long clt_reps = 2000;
  CLI::App* clt_cmd = app.add_subcommand(
      "clt", "empirical vs limiting fluctuation covariance at a probe time");
  add_params_options(clt_cmd, in);
  add_population_option(clt_cmd, in, true);
  clt_cmd->add_option("--n", clt_n, "population size")->capture_default_str();
  clt_cmd->add_option("--t-end", clt_t, "probe time")->capture_default_str();
  clt_cmd->add_option("--replicates", clt_reps, "chain replicates")->capture_default_str();
  clt_cmd->add_option("--seed", in.seed, "base RNG seed");

  std::string grid_spec = "0:2:21";
  double pi12 = 0.5;
  double level_x1 = 0.5;
  CLI::App* level_cmd = app.add_subcommand(
      "levelcurves", "Q12 limit on a (pi11, pi22) grid at fixed pi12 and x1");
  level_cmd->add_option("--grid", grid_spec, "grid as lo:hi:steps")->capture_default_str();
  level_cmd->add_option("--pi12", pi12, "off-diagonal rate")->capture_default_str();
  level_cmd->add_option("--x1", level_x1, "type-1 fraction")->capture_default_str();
  level_cmd->add_option("--out", in.out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const PopulationCounts counts = load_population(in).as_counts(sim_n);
      SimConfig cfg;
      cfg.seed = in.seed;
      cfg.t_max = sim_t_end;
      const SimTrajectory traj = simulate(params, counts, cfg);
      emit(in, as_json ? dump_json(trajectory_to_json(traj)) : trajectory_to_csv(traj));
    } else if (fluid_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const PopulationFractions fr = load_population(in).as_fractions();
      emit(in, fluid_to_csv(integrate_fluid(params, fr, fluid_t_end, fluid_rtol)));
    } else if (pattern_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const PopulationFractions fr = load_population(in).as_fractions();
      const auto [pattern, bound] = mating_pattern_limit(params, fr, eps, pattern_rtol);
      emit(in, dump_json(pattern_report_to_json(pattern, bound)));
    } else if (classify_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      Json j;
      j["class"] = to_string(classify_2x2(params));
      j["delta"] = params.pi(0, 0) + params.pi(1, 1) - params.pi(0, 1) - params.pi(1, 0);
      emit(in, dump_json(j));
    } else if (fb_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const auto decomposition = check_fine_balance(params);
      if (!decomposition)
        throw NotFineBalance("rates do not admit an additive decomposition");
      emit(in, dump_json(fine_balance_to_json(*decomposition)));
    } else if (sym_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      PopulationFractions fr = in.population_path.empty()
                                   ? make_fractions({sym_x1, 1.0 - sym_x1},
                                                    {sym_x1, 1.0 - sym_x1})
                                   : load_population(in).as_fractions();
      const Sym2x2Solution sol(params, fr);
      emit(in, dump_json(sym2x2_report_to_json(sol)));
    } else if (converge_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const PopulationFractions fr = load_population(in).as_fractions();
      if (conv_seeds < 1) throw InvalidConfig("--replicates must be positive");
      emit(in, convergence_to_csv(convergence_study(params, fr, n_list,
                                                    static_cast<int>(conv_seeds), in.seed,
                                                    conv_t_end)));
    } else if (clt_cmd->parsed()) {
      const ModelParams params = params_from_json(load_params_doc(in));
      const PopulationFractions fr = load_population(in).as_fractions();
      const FluctuationReport report =
          empirical_fluctuations(params, fr, clt_n, clt_t, clt_reps, in.seed);
      emit(in, dump_json(clt_report_to_json(report)));
    } else if (level_cmd->parsed()) {
      double lo = 0.0, hi = 0.0;
      int steps = 0;
      char sep1 = 0, sep2 = 0;
      std::istringstream parse_grid(grid_spec);
      parse_grid >> lo >> sep1 >> hi >> sep2 >> steps;
      if (!parse_grid || sep1 != ':' || sep2 != ':')
        throw InvalidConfig("--grid expects lo:hi:steps, got \"" + grid_spec + "\"");
      emit(in, levelcurves_to_csv(levelcurves_grid(lo, hi, steps, pi12, level_x1)));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
