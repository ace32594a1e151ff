#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pairsim/closed_form.hpp"
#include "pairsim/ctmc.hpp"
#include "pairsim/experiments.hpp"
#include "pairsim/fluctuations.hpp"
#include "pairsim/fluid.hpp"
#include "pairsim/matrix.hpp"
#include "pairsim/model.hpp"

namespace pairsim {

using Json = nlohmann::json;

/// Parameters from {"alpha": [...], "beta": [...], "p": [[...]]} or from a
/// bare rate matrix {"pi": [[...]]}. Malformed documents raise InvalidConfig;
/// value checks are the same as build_params / params_from_pi.
ModelParams params_from_json(const Json& j);

/// Population from {"n": int, "x": [...], "y": [...]} (integer counts; "n" is
/// optional and must match the sums when present) or from limiting fractions
/// {"x_frac": [...], "y_frac": [...]}. Exactly one of the two forms.
struct PopulationSpec {
  std::optional<PopulationCounts> counts;
  std::optional<PopulationFractions> fractions;

  /// Fractions: either given directly or counts scaled by 1/n.
  PopulationFractions as_fractions() const;

  /// Counts: as given, or fractions rounded to size n. A file that pins the
  /// counts rejects a conflicting n; a fractions file needs n >= 1.
  PopulationCounts as_counts(long n) const;
};

PopulationSpec population_from_json(const Json& j);

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

/// {"events": [[t, i, j], ...], "pattern": [[...]], "t_absorb": number|null}
/// with 1-based type indices, matching the notation used everywhere else.
Json trajectory_to_json(const SimTrajectory& traj);

/// One `t,i,j` row per event, 1-based types, header included.
std::string trajectory_to_csv(const SimTrajectory& traj);

/// One `t,Q11,...,Qkk` row per accepted integrator node, row-major entries.
std::string fluid_to_csv(const FluidSolution& fluid);

Json pattern_report_to_json(const Mat& pattern, double error_bound);

Json fine_balance_to_json(const FineBalanceDecomposition& d);

/// {case, gamma, theta1, theta2, a1_inf, q12_inf, pattern, class}; the
/// constants that a branch does not define are null.
Json sym2x2_report_to_json(const Sym2x2Solution& sol);

/// {n, t, replicates, cov_empirical, cov_limit, rel_diff, mean_scaled,
/// se_scaled}.
Json clt_report_to_json(const FluctuationReport& report);

/// `n,seed,sup_error` rows in the order produced by convergence_study.
std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows);

/// `pi11,pi22,q12` rows, pi11-major.
std::string levelcurves_to_csv(const LevelCurveGrid& grid);

/// Parses the file at path; unreadable or unparsable input raises
/// InvalidConfig.
Json load_json_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

/// Canonical dump: two-space indent, sorted keys (the container is ordered),
/// trailing newline. Identical values give identical bytes.
std::string dump_json(const Json& j);

}  // namespace pairsim
