#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "rmp/optimizer.hpp"

namespace py = pybind11;
using namespace rmp;

namespace {

ScenarioSpec make_scenario(const std::string& config_or_name, const std::optional<std::string>& overrides) {
  if (overrides) return builtin_scenario(config_or_name, *overrides);
  return load_scenario(config_or_name);
}

ControlProcess to_control(const ScenarioSpec& s, const std::optional<py::array_t<double>>& values) {
  if (!values) return s.default_control();
  const auto arr = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(*values);
  const std::size_t n = s.grid.n_steps, k = s.controls.dim();
  if (static_cast<std::size_t>(arr.size()) == k) {
    std::vector<double> v(arr.data(), arr.data() + k);
    return ControlProcess::constant(n, v);
  }
  if (static_cast<std::size_t>(arr.size()) != n * k)
    throw py::value_error("control must have " + std::to_string(k) + " or " + std::to_string(n * k) + " entries");
  return ControlProcess(n, k, std::vector<double>(arr.data(), arr.data() + n * k));
}

py::array_t<double> control_array(const ControlProcess& c) {
  py::array_t<double> out({c.n_steps(), c.dim()});
  std::copy(c.values().begin(), c.values().end(), out.mutable_data());
  return out;
}

BrownianEnsemble noise(const ScenarioSpec& s, std::optional<std::uint64_t> seed) {
  return sample_brownian(s.grid, s.n_paths, s.coef().noise_dim(), seed.value_or(s.seed));
}

py::dict residual_dict(const MpResidualReport& r) {
  py::dict d;
  d["residual"] = r.residual;
  d["step_se"] = r.step_se;
  d["q_bar"] = r.q_bar;
  d["min_residual"] = r.min_residual;
  d["worst_step"] = r.worst_step;
  d["tol"] = r.tol;
  d["flagged"] = r.flagged;
  d["certified"] = r.certified;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust mean-field control solver";

  // base first: later registrations are tried first
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  py::class_<ScenarioSpec>(m, "Scenario")
      .def(py::init(&make_scenario), py::arg("config"), py::arg("overrides") = py::none(),
           "Built-in name or JSON text; overrides (JSON) apply to a built-in name")
      .def_readonly("name", &ScenarioSpec::name)
      .def_readonly("family", &ScenarioSpec::family)
      .def_readwrite("n_paths", &ScenarioSpec::n_paths)
      .def_readwrite("seed", &ScenarioSpec::seed)
      .def_property_readonly("n_steps", [](const ScenarioSpec& s) { return s.grid.n_steps; })
      .def_property_readonly("horizon", [](const ScenarioSpec& s) { return s.grid.horizon; })
      .def_property_readonly("theta", [](const ScenarioSpec& s) {
        std::vector<double> out;
        for (const auto& p : s.theta.points()) out.push_back(p.coord);
        return out;
      })
      .def_property_readonly("vertices", [](const ScenarioSpec& s) { return s.polytope.vertices(); })
      .def_property_readonly("control_bounds",
                             [](const ScenarioSpec& s) { return py::make_tuple(s.controls.lower(), s.controls.upper()); })
      .def("default_control", [](const ScenarioSpec& s) { return control_array(s.default_control()); })
      .def("to_json", [](const ScenarioSpec& s) { return serialize(s); })
      .def("__repr__", [](const ScenarioSpec& s) {
        return "<Scenario " + s.name + " steps=" + std::to_string(s.grid.n_steps) + " paths=" + std::to_string(s.n_paths) + ">";
      });

  m.def("builtin_names", &builtin_names);

  m.def(
      "validate",
      [](const ScenarioSpec& s, std::size_t probes, std::uint64_t seed) {
        py::list out;
        for (const auto& c : validate_assumptions(s, probes, seed).checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["worst_ratio"] = c.worst_ratio;
          d["witness"] = c.witness;
          out.append(d);
        }
        return out;
      },
      py::arg("scenario"), py::arg("probes") = 200, py::arg("seed") = 12345);

  m.def(
      "evaluate",
      [](const ScenarioSpec& s, std::optional<py::array_t<double>> control, std::optional<std::uint64_t> seed) {
        const RobustEvaluation e = evaluate_J(s, to_control(s, control), noise(s, seed));
        py::dict d;
        d["value"] = e.value;
        d["value_se"] = e.value_se;
        d["g"] = e.g;
        d["g_se"] = e.g_se;
        d["vertex_values"] = e.vertex_values;
        d["argmax"] = e.argmax;
        d["active"] = e.active;
        return d;
      },
      py::arg("scenario"), py::arg("control") = py::none(), py::arg("seed") = py::none());

  m.def(
      "duality",
      [](const ScenarioSpec& s, double theta, py::array_t<double> direction, std::optional<py::array_t<double>> control,
         std::optional<std::uint64_t> seed) {
        const DualityResult r =
            duality_check(s, theta, to_control(s, control), to_control(s, direction), noise(s, seed));
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["lhs_se"] = r.lhs_se;
        d["rhs_se"] = r.rhs_se;
        d["gap"] = r.gap;
        return d;
      },
      py::arg("scenario"), py::arg("theta"), py::arg("direction"), py::arg("control") = py::none(),
      py::arg("seed") = py::none());

  m.def(
      "mp_residual",
      [](const ScenarioSpec& s, std::optional<py::array_t<double>> control, std::optional<std::uint64_t> seed) {
        return residual_dict(mp_residual(s, to_control(s, control), noise(s, seed)));
      },
      py::arg("scenario"), py::arg("control") = py::none(), py::arg("seed") = py::none());

  m.def(
      "optimize",
      [](const ScenarioSpec& s, std::optional<py::array_t<double>> control, std::size_t max_iters,
         std::optional<std::uint64_t> seed) {
        DescentOptions o;
        o.max_iters = max_iters;
        const ControlProcess v0 = to_control(s, control);
        OptimizationTrace tr;
        {
          py::gil_scoped_release nogil;
          tr = robust_descent(s, v0, noise(s, seed), o);
        }
        py::dict d;
        d["control"] = control_array(tr.final_control());
        d["values"] = tr.values;
        d["value_se"] = tr.value_se;
        d["steps"] = tr.steps;
        d["certified"] = tr.certified;
        d["stop_reason"] = tr.stop_reason;
        d["residual"] = residual_dict(tr.residual);
        return d;
      },
      py::arg("scenario"), py::arg("control") = py::none(), py::arg("max_iters") = 50, py::arg("seed") = py::none());

  m.def("psi", &psi, py::arg("p"));
  m.def("p_m_from_norm", &p_m_from_norm, py::arg("norm"));
  m.def("reverse_holder_K", &reverse_holder_K, py::arg("p"), py::arg("norm"));
  m.def("john_nirenberg_bound", &john_nirenberg_bound, py::arg("theta"), py::arg("norm"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"rmp"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the rmp command line in-process; returns (exit code, stdout, stderr)");
}
