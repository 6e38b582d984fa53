#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "riskdp/dp.hpp"
#include "riskdp/error.hpp"
#include "riskdp/grid.hpp"
#include "riskdp/harness.hpp"
#include "riskdp/ucb.hpp"
#include "riskdp/vigu.hpp"

namespace py = pybind11;
using namespace riskdp;

namespace {

// Plain-data view of a solution: values and actions at every (h, s, y).
struct Solution {
  Grid grid{1, 1};
  ValueTable value;
  DiscretePolicy policy;
  std::int64_t simulator_calls = 0;
};

TabularRSMDP mdp_from_json(const std::string& text) { return parse_mdp(nlohmann::json::parse(text)); }

UtilityFn utility_from_json(const std::string& text, int horizon) {
  return make_utility(parse_utility_spec(nlohmann::json::parse(text)), horizon);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-sensitive tabular planning and learning (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_RuntimeError);

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int>(), py::arg("m"), py::arg("horizon"))
      .def_property_readonly("m", &Grid::m)
      .def_property_readonly("horizon", &Grid::horizon)
      .def_property_readonly("eps", &Grid::eps)
      .def("y_size", &Grid::y_size, py::arg("h"))
      .def("value", &Grid::value, py::arg("index"))
      .def("project_r", [](const Grid& g, double r) { return project_r(g, r); }, py::arg("r"))
      .def("project_y", [](const Grid& g, int h, double y) { return project_y(g, h, y); }, py::arg("h"), py::arg("y"));

  py::class_<TabularRSMDP>(m, "MDP")
      .def_readonly("S", &TabularRSMDP::S)
      .def_readonly("A", &TabularRSMDP::A)
      .def_readonly("H", &TabularRSMDP::H)
      .def("lambda_max", &TabularRSMDP::lambda_max)
      .def("eta_max", &TabularRSMDP::eta_max);
  m.def("_mdp_from_json", &mdp_from_json);

  py::class_<UtilityFn>(m, "Utility")
      .def("__call__", &UtilityFn::operator(), py::arg("y"))
      .def_property_readonly("kappa", &UtilityFn::kappa);
  m.def("_utility_from_json", &utility_from_json);

  py::class_<Solution>(m, "Solution")
      .def_readonly("grid", &Solution::grid)
      .def_readonly("simulator_calls", &Solution::simulator_calls)
      .def("value", [](const Solution& s, int h, int st, int y) { return s.value.at(h, st, y); })
      .def("action", [](const Solution& s, int h, int st, int y) { return s.policy.at(h, st, y); });

  m.def(
      "solve_optimal",
      [](const TabularRSMDP& mdp, const UtilityFn& u, int grid_m) {
        const Grid grid(grid_m, mdp.H);
        auto sol = solve_optimal(discretize(mdp, grid), u);
        return Solution{grid, std::move(sol.value), std::move(sol.policy), 0};
      },
      py::arg("mdp"), py::arg("utility"), py::arg("m"));

  m.def(
      "vigu",
      [](const TabularRSMDP& mdp, const UtilityFn& u, int grid_m, std::int64_t n, std::uint64_t seed, double p) {
        const Grid grid(grid_m, mdp.H);
        Simulator sim(mdp);
        auto result = vigu(sim, u, grid, n, CounterRng(seed), p);
        return Solution{grid, std::move(result.estimate.value), std::move(result.estimate.policy),
                        result.simulator_calls};
      },
      py::arg("mdp"), py::arg("utility"), py::arg("m"), py::arg("n"), py::arg("seed") = 0, py::arg("p") = 0.1);

  m.def(
      "vigu_ucb",
      [](const TabularRSMDP& mdp, const UtilityFn& u, int grid_m, std::int64_t episodes, std::uint64_t seed,
         double p) {
        UcbOptions options;
        options.episodes = episodes;
        options.p = p;
        const auto trace = vigu_ucb(mdp, u, Grid(grid_m, mdp.H), options, seed);
        std::vector<double> regret;
        regret.reserve(trace.records.size());
        for (const auto& r : trace.records) regret.push_back(r.regret);
        return regret;
      },
      py::arg("mdp"), py::arg("utility"), py::arg("m"), py::arg("episodes"), py::arg("seed") = 0,
      py::arg("p") = 0.1, "Per-episode regret V*(s1) - V^{pi_k}(s1) on the grid.");

  m.def("recommended_eps", &recommended_eps, py::arg("horizon"), py::arg("states"), py::arg("actions"),
        py::arg("total_steps"), py::arg("kappa"), py::arg("lambda_"), py::arg("eta"));

  m.def(
      "_run_experiment_json",
      [](const std::string& text) {
        const auto table = run_experiment(parse_config(nlohmann::json::parse(text)));
        std::ostringstream os;
        write_csv(table, os);
        return os.str();
      },
      py::arg("config_json"));
}
