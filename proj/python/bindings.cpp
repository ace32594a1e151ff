#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pairsim/closed_form.hpp"
#include "pairsim/ctmc.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/experiments.hpp"
#include "pairsim/fluctuations.hpp"
#include "pairsim/fluid.hpp"
#include "pairsim/io_json.hpp"
#include "pairsim/model.hpp"

namespace py = pybind11;
using namespace pairsim;

namespace {

Mat mat_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty())
    throw DimensionMismatch("matrix needs at least one row and column");
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw DimensionMismatch("matrix rows must all have the same length");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> mat_rows(const Mat& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
    for (int j = 0; j < m.cols(); ++j)
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return rows;
}

py::object json_to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Poisson encounter-mating model: exact simulation, fluid limits, closed forms";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelParams>(m, "ModelParams")
      .def_readonly("k", &ModelParams::k)
      .def_property_readonly("alpha", [](const ModelParams& p) { return p.alpha; })
      .def_property_readonly("beta", [](const ModelParams& p) { return p.beta; })
      .def_property_readonly("pi", [](const ModelParams& p) { return mat_rows(p.pi); })
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(k=" + std::to_string(p.k) + ")";
      });

  py::class_<PopulationFractions>(m, "PopulationFractions")
      .def_readonly("x", &PopulationFractions::x)
      .def_readonly("y", &PopulationFractions::y);

  py::class_<PopulationCounts>(m, "PopulationCounts")
      .def_readonly("n", &PopulationCounts::n)
      .def_readonly("x", &PopulationCounts::x)
      .def_readonly("y", &PopulationCounts::y);

  m.def("params_from_pi",
        [](const std::vector<std::vector<double>>& pi) { return params_from_pi(mat_from_rows(pi)); },
        py::arg("pi"), "Parameters from a bare positive rate matrix.");
  m.def("build_params",
        [](const std::vector<double>& alpha, const std::vector<double>& beta,
           const std::vector<std::vector<double>>& p) {
          return build_params(alpha, beta, mat_from_rows(p));
        },
        py::arg("alpha"), py::arg("beta"), py::arg("p"),
        "Parameters from firing rates and acceptance probabilities.");
  m.def("make_fractions", &make_fractions, py::arg("x"), py::arg("y"));
  m.def("make_counts", &make_counts, py::arg("x"), py::arg("y"));
  m.def("round_fractions", &round_fractions, py::arg("fractions"), py::arg("n"));

  m.def("check_fine_balance",
        [](const ModelParams& params) -> py::object {
          const auto d = check_fine_balance(params);
          if (!d) return py::none();
          return json_to_py(fine_balance_to_json(*d));
        },
        py::arg("params"),
        "Additive decomposition {alpha_bar, beta_bar} of the rates, or None.");
  m.def("classify",
        [](const ModelParams& params) { return std::string(to_string(classify_2x2(params))); },
        py::arg("params"), "Trichotomy class of a symmetric 2x2 system.");

  m.def("simulate",
        [](const ModelParams& params, const PopulationCounts& pop, std::uint64_t seed,
           double t_max) {
          SimConfig cfg;
          cfg.seed = seed;
          cfg.t_max = t_max;
          SimTrajectory traj;
          {
            py::gil_scoped_release nogil;
            traj = simulate(params, pop, cfg);
          }
          return json_to_py(trajectory_to_json(traj));
        },
        py::arg("params"), py::arg("pop"), py::arg("seed") = 0,
        py::arg("t_max") = std::numeric_limits<double>::infinity(),
        "One exact trajectory as {events, pattern, t_absorb} with 1-based types.");
  m.def("mc_pattern",
        [](const ModelParams& params, const PopulationCounts& pop, long replicates,
           std::uint64_t seed) {
          McPattern mc;
          {
            py::gil_scoped_release nogil;
            mc = mc_pattern(params, pop, replicates, seed);
          }
          py::dict out;
          out["mean"] = mat_rows(mc.mean);
          out["variance"] = mat_rows(mc.variance);
          out["replicates"] = mc.replicates;
          return out;
        },
        py::arg("params"), py::arg("pop"), py::arg("replicates"), py::arg("seed") = 0,
        "Monte Carlo mean and variance of the absorbed pattern.");
  m.def("exact_pattern_oracle",
        [](const ModelParams& params, const PopulationCounts& pop, std::size_t max_states) {
          Mat q;
          {
            py::gil_scoped_release nogil;
            q = exact_pattern_oracle(params, pop, max_states);
          }
          return mat_rows(q);
        },
        py::arg("params"), py::arg("pop"), py::arg("max_states") = std::size_t{1000000},
        "Expected absorbed pattern by exhaustive first-step analysis.");

  py::class_<FluidSolution>(m, "FluidSolution")
      .def("eval", [](const FluidSolution& f, double t) { return mat_rows(f.eval(t)); },
           py::arg("t"))
      .def("z_at", &FluidSolution::z_at, py::arg("t"))
      .def_property_readonly("t_end", &FluidSolution::t_end)
      .def_property_readonly("error_bound", &FluidSolution::error_bound);

  m.def("integrate_fluid",
        [](const ModelParams& params, const PopulationFractions& fractions, double t_end,
           double rtol) {
          py::gil_scoped_release nogil;
          return integrate_fluid(params, fractions, t_end, rtol);
        },
        py::arg("params"), py::arg("fractions"), py::arg("t_end"), py::arg("rtol") = 1e-8,
        "Fluid trajectory on [0, t_end].");
  m.def("mating_pattern_limit",
        [](const ModelParams& params, const PopulationFractions& fractions, double eps,
           double rtol) {
          std::pair<Mat, double> res;
          {
            py::gil_scoped_release nogil;
            res = mating_pattern_limit(params, fractions, eps, rtol);
          }
          return py::make_tuple(mat_rows(res.first), res.second);
        },
        py::arg("params"), py::arg("fractions"), py::arg("eps") = 1e-8,
        py::arg("rtol") = 1e-10,
        "(pattern, error_bound): the limit pattern to certified accuracy eps.");
  m.def("drift",
        [](const ModelParams& params, const PopulationFractions& fractions,
           const std::vector<std::vector<double>>& state) {
          return mat_rows(drift_F(params, fractions, mat_from_rows(state)));
        },
        py::arg("params"), py::arg("fractions"), py::arg("state"));

  py::class_<FineBalanceSolution>(m, "FineBalanceSolution")
      .def(py::init<const ModelParams&, const PopulationFractions&>(), py::arg("params"),
           py::arg("fractions"))
      .def("eval",
           [](const FineBalanceSolution& s, double t) {
             const FluidState st = s.eval(t);
             py::dict out;
             out["A"] = st.A;
             out["B"] = st.B;
             out["Z"] = st.Z;
             out["Q"] = mat_rows(st.Q);
             return out;
           },
           py::arg("t"))
      .def("pattern", [](const FineBalanceSolution& s) { return mat_rows(s.pattern()); });

  py::class_<Sym2x2Solution>(m, "Sym2x2Solution")
      .def(py::init<const ModelParams&, const PopulationFractions&>(), py::arg("params"),
           py::arg("fractions"))
      .def("a1_of_t", &Sym2x2Solution::a1_of_t, py::arg("t"))
      .def("z_of_t", &Sym2x2Solution::z_of_t, py::arg("t"))
      .def("q12_of_t", &Sym2x2Solution::q12_of_t, py::arg("t"))
      .def("q12_infinity", &Sym2x2Solution::q12_infinity)
      .def("pattern", [](const Sym2x2Solution& s) { return mat_rows(s.pattern()); })
      .def("report", [](const Sym2x2Solution& s) { return json_to_py(sym2x2_report_to_json(s)); });

  m.def("simulate_clt_limit",
        [](const ModelParams& params, const PopulationFractions& fractions,
           const FluidSolution& fluid, double t_end, double dt, std::uint64_t seed,
           double noise_scale) {
          FluctuationPath path;
          {
            py::gil_scoped_release nogil;
            path = simulate_clt_limit(params, fractions, fluid, t_end, dt, seed, noise_scale);
          }
          py::dict out;
          out["times"] = path.times;
          py::list vs;
          for (const Mat& v : path.v) vs.append(mat_rows(v));
          out["v"] = std::move(vs);
          return out;
        },
        py::arg("params"), py::arg("fractions"), py::arg("fluid"), py::arg("t_end"),
        py::arg("dt"), py::arg("seed") = 0, py::arg("noise_scale") = 1.0,
        "Euler path of the Gaussian fluctuation process around the fluid limit.");
  m.def("simulate_diffusion",
        [](const ModelParams& params, const PopulationFractions& fractions, long n,
           double t_end, double dt, std::uint64_t seed, double noise_scale) {
          DiffusionPath path;
          {
            py::gil_scoped_release nogil;
            path = simulate_diffusion(params, fractions, n, t_end, dt, seed, noise_scale);
          }
          py::dict out;
          out["times"] = path.times;
          py::list zs;
          for (const Mat& z : path.z) zs.append(mat_rows(z));
          out["z"] = std::move(zs);
          return out;
        },
        py::arg("params"), py::arg("fractions"), py::arg("n"), py::arg("t_end"),
        py::arg("dt"), py::arg("seed") = 0, py::arg("noise_scale") = 1.0,
        "Euler-Maruyama path of the diffusion approximation of Q^n/n.");
  m.def("empirical_fluctuations",
        [](const ModelParams& params, const PopulationFractions& fractions, long n,
           double t_probe, long replicates, std::uint64_t seed) {
          FluctuationReport report;
          {
            py::gil_scoped_release nogil;
            report = empirical_fluctuations(params, fractions, n, t_probe, replicates, seed);
          }
          return json_to_py(clt_report_to_json(report));
        },
        py::arg("params"), py::arg("fractions"), py::arg("n"), py::arg("t_probe"),
        py::arg("replicates"), py::arg("seed") = 0,
        "Empirical vs limiting covariance report of the scaled fluctuation.");

  m.def("convergence_study",
        [](const ModelParams& params, const PopulationFractions& fractions,
           const std::vector<long>& n_list, int n_seeds, std::uint64_t base_seed,
           double t_hi) {
          std::vector<ConvergenceRow> rows;
          {
            py::gil_scoped_release nogil;
            rows = convergence_study(params, fractions, n_list, n_seeds, base_seed, t_hi);
          }
          py::list out;
          for (const ConvergenceRow& row : rows) {
            py::dict d;
            d["n"] = row.n;
            d["seed"] = row.seed;
            d["sup_error"] = row.sup_error;
            out.append(std::move(d));
          }
          return out;
        },
        py::arg("params"), py::arg("fractions"), py::arg("n_list"), py::arg("n_seeds"),
        py::arg("base_seed") = 0, py::arg("t_hi") = 3.0,
        "Sup-norm distance to the fluid path for coupled runs across sizes.");
  m.def("levelcurves_grid",
        [](double lo, double hi, int steps, double pi12, double x1) {
          LevelCurveGrid grid;
          {
            py::gil_scoped_release nogil;
            grid = levelcurves_grid(lo, hi, steps, pi12, x1);
          }
          py::dict out;
          out["pi12"] = grid.pi12;
          out["x1"] = grid.x1;
          out["values"] = grid.values;
          out["q12"] = mat_rows(grid.q12);
          return out;
        },
        py::arg("lo") = 0.0, py::arg("hi") = 2.0, py::arg("steps") = 21,
        py::arg("pi12") = 0.5, py::arg("x1") = 0.5,
        "Q12 limit on a (pi11, pi22) grid at fixed pi12 and x1.");
}
