#include "pairsim/io_json.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "pairsim/errors.hpp"

namespace pairsim {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> vec_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw InvalidConfig(std::string("expected array field \"") + key + "\"");
  std::vector<double> out;
  for (const Json& e : j.at(key)) {
    if (!e.is_number()) throw InvalidConfig(std::string("non-numeric entry in \"") + key + "\"");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<long> int_vec_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw InvalidConfig(std::string("expected array field \"") + key + "\"");
  std::vector<long> out;
  for (const Json& e : j.at(key)) {
    if (!e.is_number_integer())
      throw InvalidConfig(std::string("non-integer entry in \"") + key + "\"");
    out.push_back(e.get<long>());
  }
  return out;
}

Mat mat_field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidConfig(std::string("expected matrix field \"") + key + "\"");
  return mat_from_json(j.at(key));
}

}  // namespace

Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
    throw InvalidConfig("matrix must be a non-empty array of non-empty rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.front().size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw InvalidConfig("matrix rows must all have the same length");
    for (int c = 0; c < cols; ++c) {
      const Json& e = row.at(static_cast<std::size_t>(c));
      if (!e.is_number()) throw InvalidConfig("non-numeric matrix entry");
      m(i, c) = e.get<double>();
    }
  }
  return m;
}

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ModelParams params_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidConfig("parameters must be a JSON object");
  if (j.contains("pi")) {
    if (j.contains("alpha") || j.contains("beta") || j.contains("p"))
      throw InvalidConfig("give either \"pi\" or \"alpha\"/\"beta\"/\"p\", not both");
    return params_from_pi(mat_from_json(j.at("pi")));
  }
  return build_params(vec_field(j, "alpha"), vec_field(j, "beta"), mat_field(j, "p"));
}

PopulationFractions PopulationSpec::as_fractions() const {
  if (fractions) return *fractions;
  const double n = static_cast<double>(counts->n);
  std::vector<double> xf(counts->x.size()), yf(counts->y.size());
  for (std::size_t i = 0; i < xf.size(); ++i) xf[i] = static_cast<double>(counts->x[i]) / n;
  for (std::size_t i = 0; i < yf.size(); ++i) yf[i] = static_cast<double>(counts->y[i]) / n;
  return make_fractions(xf, yf);
}

PopulationCounts PopulationSpec::as_counts(long n) const {
  if (counts) {
    if (n > 0 && n != counts->n)
      throw InvalidPopulation("population file fixes n = " + std::to_string(counts->n));
    return *counts;
  }
  if (n < 1) throw InvalidPopulation("fractions input needs a population size n >= 1");
  return round_fractions(*fractions, n);
}

PopulationSpec population_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidConfig("population must be a JSON object");
  const bool count_form = j.contains("x") || j.contains("y") || j.contains("n");
  const bool frac_form = j.contains("x_frac") || j.contains("y_frac");
  if (count_form == frac_form)
    throw InvalidConfig("population must be {\"n\",\"x\",\"y\"} or {\"x_frac\",\"y_frac\"}");
  PopulationSpec spec;
  if (count_form) {
    spec.counts = make_counts(int_vec_field(j, "x"), int_vec_field(j, "y"));
    if (j.contains("n")) {
      if (!j.at("n").is_number_integer()) throw InvalidConfig("\"n\" must be an integer");
      if (j.at("n").get<long>() != spec.counts->n)
        throw InvalidPopulation("\"n\" disagrees with the count sums");
    }
  } else {
    spec.fractions = make_fractions(vec_field(j, "x_frac"), vec_field(j, "y_frac"));
  }
  return spec;
}

Json trajectory_to_json(const SimTrajectory& traj) {
  Json events = Json::array();
  for (const SimEvent& e : traj.events)
    events.push_back(Json::array({e.t, e.i + 1, e.j + 1}));
  Json j;
  j["events"] = std::move(events);
  j["pattern"] = mat_to_json(traj.pattern);
  j["t_absorb"] = traj.t_absorb ? Json(*traj.t_absorb) : Json(nullptr);
  return j;
}

std::string trajectory_to_csv(const SimTrajectory& traj) {
  std::string out = "t,i,j\n";
  for (const SimEvent& e : traj.events) {
    out += fmt(e.t);
    out += ',';
    out += std::to_string(e.i + 1);
    out += ',';
    out += std::to_string(e.j + 1);
    out += '\n';
  }
  return out;
}

std::string fluid_to_csv(const FluidSolution& fluid) {
  const int k = fluid.eval(0.0).rows();
  std::string out = "t";
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      out += ",Q" + std::to_string(i) + std::to_string(j);
  out += '\n';
  for (std::size_t idx = 0; idx < fluid.node_count(); ++idx) {
    out += fmt(fluid.times()[idx]);
    const Mat q = fluid.at_node(idx);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        out += ',';
        out += fmt(q(i, j));
      }
    out += '\n';
  }
  return out;
}

Json pattern_report_to_json(const Mat& pattern, double error_bound) {
  Json j;
  j["pattern"] = mat_to_json(pattern);
  j["error_bound"] = error_bound;
  return j;
}

Json fine_balance_to_json(const FineBalanceDecomposition& d) {
  Json j;
  j["alpha_bar"] = d.alpha_bar;
  j["beta_bar"] = d.beta_bar;
  return j;
}

Json sym2x2_report_to_json(const Sym2x2Solution& sol) {
  const Sym2x2Params& c = sol.constants();
  Json j;
  j["case"] = to_string(sol.case_tag());
  j["gamma"] = c.gamma ? Json(*c.gamma) : Json(nullptr);
  j["theta1"] = c.theta1 ? Json(*c.theta1) : Json(nullptr);
  j["theta2"] = c.theta2 ? Json(*c.theta2) : Json(nullptr);
  j["a1_inf"] = sol.equilibrium().a1_inf;
  j["q12_inf"] = sol.q12_infinity();
  j["pattern"] = mat_to_json(sol.pattern());
  j["class"] = to_string(sol.mating_class());
  return j;
}

Json clt_report_to_json(const FluctuationReport& report) {
  Json j;
  j["n"] = report.n;
  j["t"] = report.t;
  j["replicates"] = report.replicates;
  j["cov_empirical"] = mat_to_json(report.cov_empirical);
  j["cov_limit"] = mat_to_json(report.cov_limit);
  j["rel_diff"] = mat_to_json(report.rel_diff);
  j["mean_scaled"] = report.mean_scaled;
  j["se_scaled"] = report.se_scaled;
  return j;
}

std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "n,seed,sup_error\n";
  for (const ConvergenceRow& row : rows) {
    out += std::to_string(row.n);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += fmt(row.sup_error);
    out += '\n';
  }
  return out;
}

std::string levelcurves_to_csv(const LevelCurveGrid& grid) {
  std::string out = "pi11,pi22,q12\n";
  const int steps = static_cast<int>(grid.values.size());
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      out += fmt(grid.values[static_cast<std::size_t>(i)]);
      out += ',';
      out += fmt(grid.values[static_cast<std::size_t>(j)]);
      out += ',';
      out += fmt(grid.q12(i, j));
      out += '\n';
    }
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidConfig("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write " + path);
  out << text;
  out.close();
  if (!out) throw InvalidConfig("failed writing " + path);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace pairsim
