// Python bindings for the core operations: prox oracles, schedules,
// experiment runs, slope fits, and instance generation.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sppa/bench.hpp"
#include "sppa/operators.hpp"
#include "sppa/problems.hpp"
#include "sppa/schedules.hpp"

namespace py = pybind11;
using namespace sppa;

namespace {

ProblemInstance gen_dispatch(const std::string& kind, long m, long n,
                             std::uint64_t seed) {
  if (kind == "lasso") return gen_lasso(m, n, seed);
  if (kind == "basis_pursuit") return gen_basis_pursuit(m, n, seed);
  if (kind == "fused_lasso") return gen_fused_lasso(m, n, seed);
  if (kind == "matrix_game") return gen_matrix_game(m, n, seed);
  if (kind == "quadratic_l1") return gen_quadratic_l1(n, seed);
  throw std::invalid_argument("unknown problem kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(sppa, m) {
  m.doc() = "Symplectic proximal point algorithms";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("soft_threshold", &soft_threshold, py::arg("v"), py::arg("tau"),
        "Componentwise soft threshold sign(v) * max(|v| - tau, 0).");
  m.def("project_simplex", &project_simplex, py::arg("v"),
        "Euclidean projection onto the probability simplex.");
  m.def("prox_least_squares", &prox_least_squares, py::arg("A"), py::arg("b"),
        py::arg("t"), py::arg("v"), "Prox of 1/2 ||Ax - b||^2 at index t.");

  py::class_<Schedule>(m, "Schedule")
      .def_readonly("name", &Schedule::name)
      .def("A", [](const Schedule& s, long k) { return s.A(k); }, py::arg("k"))
      .def("a", [](const Schedule& s, long k) { return s.a(k); }, py::arg("k"))
      .def("b", [](const Schedule& s, long k) { return s.b(k); }, py::arg("k"))
      .def("c", [](const Schedule& s, long k) { return s.c(k); }, py::arg("k"));

  m.def("make_schedule", &make_schedule, py::arg("name"), py::arg("param") = 1.0,
        "Builds a named schedule (constant_index, rising_factorial, exponential, "
        "salm_lasso).");
  m.def(
      "validate_schedule",
      [](const Schedule& s, long horizon) {
        ScheduleReport rep = validate(s, horizon);
        return py::make_tuple(rep.valid, rep.first_violation, rep.condition);
      },
      py::arg("schedule"), py::arg("horizon"),
      "Returns (valid, first_violation, condition).");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        ExperimentConfig cfg = parse_config(config_json);
        ExperimentResult res = run_experiment(cfg);
        return summary_to_json(res.summary);
      },
      py::arg("config_json"),
      "Runs one experiment from a JSON config string; returns the summary JSON "
      "line. Writes the trace CSV when the config sets \"out\".");

  m.def(
      "fit_slope",
      [](const std::string& trace_csv, const std::string& metric) {
        return fit_slope(trace_from_csv(trace_csv), metric);
      },
      py::arg("trace_csv"), py::arg("metric") = "residual_sq",
      "Log-log slope of a metric over the last half of a trace CSV string.");

  m.def(
      "gen_instance",
      [](const std::string& kind, long m, long n, std::uint64_t seed) {
        return instance_to_string(gen_dispatch(kind, m, n, seed));
      },
      py::arg("kind"), py::arg("m"), py::arg("n"), py::arg("seed"),
      "Generates a seeded instance and returns its text serialization.");

  m.def(
      "objective",
      [](const std::string& instance_text, const Vector& x) {
        return objective_value(instance_from_string(instance_text), x);
      },
      py::arg("instance_text"), py::arg("x"),
      "Objective value of a serialized instance at x.");

  m.def(
      "reference",
      [](const std::string& instance_text, long budget) {
        ReferenceSolution ref =
            reference_solution(instance_from_string(instance_text), budget);
        return py::make_tuple(ref.xstar, ref.fstar, ref.certified_tol);
      },
      py::arg("instance_text"), py::arg("budget") = 200000,
      "High-accuracy reference (xstar, fstar, certified_tol) for a serialized "
      "instance.");
}
