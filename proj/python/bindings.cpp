#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>

#include "sigflow/error.hpp"
#include "sigflow/orchestrator.hpp"
#include "sigflow/output.hpp"
#include "sigflow/scenario_io.hpp"
#include "sigflow/verification.hpp"

namespace py = pybind11;
using namespace sigflow;

namespace {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<ParseError>& errors) {
  std::string out;
  for (const auto& e : errors) out += (out.empty() ? "" : "\n") + e.to_string();
  return out;
}

Scenario unwrap(ParseResult r) {
  if (!r.ok()) throw ScenarioError(join(r.errors));
  return std::move(*r.scenario);
}

Model parse_model(const std::string& name) {
  if (name == "first") return Model::First;
  if (name == "second") return Model::Second;
  throw ScenarioError("model: expected 'first' or 'second', got '" + name + "'");
}

Scenario with_overrides(Scenario s, std::optional<std::string> model, std::optional<int> n_cells) {
  if (model) s.model = parse_model(*model);
  if (n_cells) s.grid.n_cells = *n_cells;
  std::string msg;
  for (const auto& v : validate_scenario(s))
    msg += (msg.empty() ? "" : "\n") + v.field + ": " + v.message + " [" + v.condition + "]";
  if (!msg.empty()) throw ScenarioError(msg);
  return s;
}

py::dict state_dict(const FlowState& st) {
  std::vector<double> x(st.grid.n_cells);
  for (int i = 0; i < st.grid.n_cells; ++i) x[i] = st.grid.center(i);
  py::dict d;
  d["t"] = st.t;
  d["x"] = x;
  d["rho"] = st.rho;
  d["v"] = st.v;
  d["mass"] = st.total_mass();
  return d;
}

py::dict balance_dict(const MassBalanceReport& m) {
  py::dict d;
  d["initial"] = m.initial;
  d["final"] = m.final;
  d["inflow"] = m.inflow;
  d["outflow"] = m.outflow;
  d["internal_transfer"] = m.internal_transfer;
  d["clamped"] = m.clamped;
  d["merge_adjustment"] = m.merge_adjustment;
  d["residual"] = m.residual;
  d["relative_residual"] = m.relative_residual;
  return d;
}

py::dict oracle_dict(const OracleComparison& c) {
  py::dict d;
  d["n_cells"] = c.n_cells;
  d["horizon"] = c.horizon;
  d["breakdown_time"] = c.breakdown_time;
  d["l1_rho"] = c.l1_rho;
  d["l1_v"] = c.l1_v;
  d["oracle_steps"] = c.oracle_steps;
  return d;
}

const PhaseRun& phase_of(const SimulationRun& run, const std::string& name) {
  if (const auto* p = run.find(name)) return *p;
  throw py::key_error("no phase named '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Traffic flow through a signalised junction";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<BreakdownError>(m, "BreakdownError", PyExc_RuntimeError);
  py::register_exception<Error>(m, "SigflowError", PyExc_RuntimeError);

  m.attr("REPORT_SCHEMA_VERSION") = kReportSchemaVersion;

  py::class_<Scenario>(m, "Scenario")
      .def_static("from_yaml", [](const std::string& text) { return unwrap(parse_scenario(text)); },
                  py::arg("text"))
      .def_static("load", [](const std::string& path) { return unwrap(load_scenario(path)); },
                  py::arg("path"))
      .def("to_yaml", &serialize_scenario)
      .def("with_overrides", &with_overrides, py::arg("model") = py::none(),
           py::arg("n_cells") = py::none(),
           "Copy with the model and/or cell count replaced; raises ScenarioError if invalid")
      .def_property_readonly("model", [](const Scenario& s) { return std::string(to_string(s.model)); })
      .def_property_readonly("n_cells", [](const Scenario& s) { return s.grid.n_cells; })
      .def_property_readonly("x_min", [](const Scenario& s) { return s.grid.x_min; })
      .def_property_readonly("x_max", [](const Scenario& s) { return s.grid.x_max; })
      .def_property_readonly("t_end", [](const Scenario& s) { return s.t_end; })
      .def_property_readonly("x0", [](const Scenario& s) { return s.timing.x0; })
      .def_property_readonly("t0", [](const Scenario& s) { return s.timing.t0; })
      .def_property_readonly("tau0", [](const Scenario& s) { return s.timing.tau0; })
      .def_property_readonly("tau1", [](const Scenario& s) { return s.timing.tau1; })
      .def_property_readonly("h", [](const Scenario& s) { return s.timing.h; })
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario model=" + std::string(to_string(s.model)) + " n_cells=" +
               std::to_string(s.grid.n_cells) + ">";
      });

  m.def(
      "validate",
      [](const std::string& text, bool oracle) {
        std::vector<std::string> out;
        for (const auto& e : parse_scenario(text, oracle).errors) out.push_back(e.to_string());
        return out;
      },
      py::arg("text"), py::arg("oracle") = false,
      "Located problems in a YAML scenario document; empty when it is valid");

  py::class_<SimulationRun>(m, "Run")
      .def_property_readonly("ok", &SimulationRun::ok)
      .def_property_readonly("model", [](const SimulationRun& r) { return std::string(to_string(r.model)); })
      .def_property_readonly("failed_phase", [](const SimulationRun& r) { return r.failed_phase; })
      .def_property_readonly("error", [](const SimulationRun& r) { return r.error; })
      .def_property_readonly("phases", [](const SimulationRun& r) {
        std::vector<std::string> names;
        for (const auto& p : r.phases) names.push_back(p.phase.name);
        return names;
      })
      .def_property_readonly("split_face", [](const SimulationRun& r) { return r.split.position; })
      .def_property_readonly("stop_face", [](const SimulationRun& r) { return r.stop.position; })
      .def_property_readonly("handoff_velocity", [](const SimulationRun& r) { return r.handoff_velocity; })
      .def_property_readonly("compatibility_residual",
                             [](const SimulationRun& r) { return r.compatibility_residual; })
      .def("snapshots",
           [](const SimulationRun& r, const std::string& phase) {
             py::list out;
             for (const auto& s : phase_of(r, phase).trajectory.snapshots) {
               auto d = state_dict(s.state);
               if (s.nodes) {
                 py::dict n;
                 n["left_x"] = s.nodes->left_x;
                 n["left_v"] = s.nodes->left_v;
                 n["right_x"] = s.nodes->right_x;
                 n["right_v"] = s.nodes->right_v;
                 d["nodes"] = n;
               }
               out.append(d);
             }
             return out;
           },
           py::arg("phase"))
      .def("final_state",
           [](const SimulationRun& r) -> std::optional<py::dict> {
             if (r.merged) return state_dict(*r.merged);
             if (r.phases.empty()) return std::nullopt;
             return state_dict(r.phases.back().trajectory.final_state());
           })
      .def("mass_balance", [](const SimulationRun& r) { return balance_dict(mass_balance_report(r)); })
      .def("write_snapshots", [](const SimulationRun& r, const std::filesystem::path& dir) {
        return write_snapshots(r, dir);
      }, py::arg("directory"));

  m.def("run", [](const Scenario& s) {
    py::gil_scoped_release release;
    return run_model(s);
  }, py::arg("scenario"), "Runs the scenario's model over its whole time range");

  m.def(
      "report_json",
      [](const Scenario& s, const SimulationRun& r, std::optional<int> oracle_cells) {
        ReportExtras extras;
        if (oracle_cells) extras.oracle = compare_with_oracle(s, *oracle_cells, oracle_horizon(s));
        return report_json(s, r, extras);
      },
      py::arg("scenario"), py::arg("run"), py::arg("oracle_cells") = py::none());

  m.def("oracle_horizon", &oracle_horizon, py::arg("scenario"));
  m.def(
      "compare_with_oracle",
      [](const Scenario& s, std::optional<int> n_cells, std::optional<double> horizon) {
        OracleComparison c;
        {
          py::gil_scoped_release release;
          c = compare_with_oracle(s, n_cells.value_or(s.grid.n_cells), horizon.value_or(oracle_horizon(s)));
        }
        return oracle_dict(c);
      },
      py::arg("scenario"), py::arg("n_cells") = py::none(), py::arg("horizon") = py::none());

  m.def(
      "emit_plot",
      [](const Scenario& s, const SimulationRun& r, const std::string& field,
         const std::filesystem::path& stem) {
        if (field != "rho" && field != "v") throw ScenarioError("field: expected 'rho' or 'v'");
        emit_plot(r, s.timing, field == "rho" ? PlotField::Density : PlotField::Velocity, stem);
      },
      py::arg("scenario"), py::arg("run"), py::arg("field"), py::arg("stem"));
}
