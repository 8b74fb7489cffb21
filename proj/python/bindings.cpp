// Python module. Results cross the boundary as the same JSON documents the
// CLI and service emit; the package wrapper decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "critmatrix/criticality.hpp"
#include "critmatrix/formats.hpp"
#include "critmatrix/platoon_sim.hpp"
#include "critmatrix/service.hpp"

namespace py = pybind11;
using namespace critmatrix;

namespace {

std::string Matrix(const std::string& project_path, const std::string& format) {
  const Fcm fcm = BuildFcm(LoadProject(project_path));
  if (format == "json") return FcmJson(fcm);
  if (format == "csv") return FcmCsv(fcm);
  if (format == "text") return FcmText(fcm);
  throw ConfigError("unknown format \"" + format + "\"", "format");
}

std::string Simulate(const std::string& scenario_path, const std::optional<std::string>& project_path,
                     bool include_trace) {
  const Scenario s = LoadScenario(scenario_path);
  BoundGuards guards;
  if (project_path) guards = BindGuards(BuildFcm(LoadProject(*project_path)), s.bindings);
  return OutcomeJson(RunScenario(s.config, s.events, s.duration, guards), include_trace);
}

}  // namespace

PYBIND11_MODULE(_critmatrix, m) {
  m.doc() = "Fault criticality matrix and platoon simulator";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = e.code();
      exc.attr("locus") = e.locus();
      exc.attr("body") = ErrorJson(e);
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("validate", [](const std::string& path) { LoadProject(path); }, py::arg("project"),
        "Raises Error with the validation diagnostics when the project is invalid.");
  m.def("fcm", &Matrix, py::arg("project"), py::arg("format") = "json");
  m.def("unresolved", [](const std::string& path) { return UnresolvedJson(BuildFcm(LoadProject(path))); },
        py::arg("project"));
  m.def(
      "rank", [](const std::string& criticality) { return std::string(ToString(Rank(Decimal::Parse(criticality)))); },
      py::arg("criticality"));
  m.def("stopping_distance", &StoppingDistance, py::arg("speed"), py::arg("reaction_delay"), py::arg("deceleration"));
  m.def("simulate", &Simulate, py::arg("scenario"), py::arg("project") = py::none(),
        py::arg("include_trace") = false);

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::string& path) { return std::make_unique<Session>(LoadProject(path), path); }),
           py::arg("project"))
      .def(
          "handle",
          [](Session& s, const std::string& method, const std::string& path, const std::string& body) {
            Response r;
            {
              py::gil_scoped_release release;
              r = s.Handle(method, path, body);
            }
            return py::make_tuple(r.status, r.body, r.revision);
          },
          py::arg("method"), py::arg("path"), py::arg("body") = "")
      .def_property_readonly("revision", &Session::revision);
}
