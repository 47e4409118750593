#include "sigflow/output.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sigflow/error.hpp"
#include "sigflow/format.hpp"

namespace sigflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "': " + std::strerror(errno));
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "': " + std::strerror(errno));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json snap_json(const FaceSnap& f) {
  return {{"requested", f.requested}, {"position", f.position}, {"face", f.face}, {"shift", f.shift}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string snapshot_csv(const FlowState& state) {
  std::string out = "# t=" + format_double(state.t) + "\nx,rho,v\n";
  for (int i = 0; i < state.grid.n_cells; ++i) {
    out += format_double(state.grid.center(i));
    out += ',';
    out += format_double(state.rho[i]);
    out += ',';
    out += format_double(state.v[i]);
    out += '\n';
  }
  return out;
}

void write_snapshot(const FlowState& state, const fs::path& path) {
  write_text(path, snapshot_csv(state));
}

FlowState parse_snapshot_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<double> t;
  bool header = false;
  std::vector<double> x, rho, v;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw Error("snapshot line " + std::to_string(lineno) + ": " + why);
    };
    if (line[0] == '#') {
      if (line.rfind("# t=", 0) == 0) {
        try {
          t = parse_double(line.substr(4));
        } catch (const std::exception&) {
          fail("bad time '" + line.substr(4) + "'");
        }
      }
      continue;
    }
    if (!header) {
      if (line != "x,rho,v") fail("expected header 'x,rho,v'");
      header = true;
      continue;
    }
    std::array<double, 3> vals{};
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t end = k < 2 ? line.find(',', pos) : line.size();
      if (end == std::string::npos) fail("expected three columns");
      try {
        vals[k] = parse_double(std::string_view(line).substr(pos, end - pos));
      } catch (const std::exception&) {
        fail("bad number in column " + std::to_string(k + 1));
      }
      pos = end + 1;
    }
    if (line.find(',', line.find(',', line.find(',') + 1) + 1) != std::string::npos)
      fail("too many columns");
    x.push_back(vals[0]);
    rho.push_back(vals[1]);
    v.push_back(vals[2]);
  }
  if (!t) throw Error("snapshot has no '# t=' line");
  if (x.size() < 2) throw Error("snapshot needs at least two cells");
  const int n = static_cast<int>(x.size());
  const double dx = (x.back() - x.front()) / (n - 1);
  RoadGrid grid{x.front() - 0.5 * dx, x.back() + 0.5 * dx, n};
  return FlowState::make(grid, std::move(rho), std::move(v), *t);
}

FlowState read_snapshot(const fs::path& path) { return parse_snapshot_csv(read_text(path)); }

int write_snapshots(const SimulationRun& run, const fs::path& dir) {
  int count = 0;
  for (const auto& pr : run.phases) {
    const auto& snaps = pr.trajectory.snapshots;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%04zu.csv", k);
      write_snapshot(snaps[k].state, dir / pr.phase.name / name);
      ++count;
    }
  }
  if (run.merged) {
    write_snapshot(*run.merged, dir / "merged.csv");
    ++count;
  }
  return count;
}

std::string report_json(const Scenario& s, const SimulationRun& run, const ReportExtras& extras) {
  const auto balance = mass_balance_report(run);
  json phases = json::array();
  for (const auto& ph : run.plan.phases) {
    json j = {{"name", ph.name},
              {"solver", to_string(ph.solver)},
              {"t_start", ph.t_start},
              {"t_end", ph.t_end},
              {"x_lo", ph.x_lo},
              {"x_hi_start", ph.x_hi_start},
              {"x_hi_end", ph.x_hi_end},
              {"left_boundary", ph.left_boundary},
              {"right_boundary", ph.right_boundary},
              {"force", ph.force}};
    const PhaseRun* pr = run.find(ph.name);
    j["completed"] = pr != nullptr;
    if (pr) {
      const auto& tr = pr->trajectory;
      j["steps"] = tr.steps;
      j["snapshots"] = tr.snapshots.size();
      j["wall_seconds"] = pr->wall_seconds;
      const auto it = std::find_if(balance.phases.begin(), balance.phases.end(),
                                   [&](const PhaseBalance& b) { return b.name == ph.name; });
      if (it != balance.phases.end())
        j["mass"] = {{"initial", it->initial}, {"final", it->final},   {"inflow", it->inflow},
                     {"outflow", it->outflow}, {"clamped", it->clamped}, {"residual", it->residual}};
      if (tr.final().nodes) {
        const auto& nd = *tr.final().nodes;
        j["final_boundary_nodes"] = {{"left_x", nd.left_x},
                                     {"left_v", nd.left_v},
                                     {"right_x", nd.right_x},
                                     {"right_v", nd.right_v}};
      }
    } else {
      j["mass"] = nullptr;
    }
    phases.push_back(std::move(j));
  }

  json report = {
      {"schema_version", kReportSchemaVersion},
      {"model", to_string(run.model)},
      {"status", run.ok() ? "ok" : "failed"},
      {"failed_phase", run.ok() ? json(nullptr) : json(run.failed_phase)},
      {"error", run.ok() ? json(nullptr) : json(run.error)},
      {"scenario",
       {{"path", extras.scenario_path},
        {"x_min", s.grid.x_min},
        {"x_max", s.grid.x_max},
        {"n_cells", s.grid.n_cells},
        {"t_end", s.t_end},
        {"mu", s.mu},
        {"signal",
         {{"x0", s.timing.x0},
          {"t0", s.timing.t0},
          {"tau0", s.timing.tau0},
          {"tau1", s.timing.tau1},
          {"h", s.timing.h}}}}},
      {"phases", phases},
      {"mass_balance",
       {{"initial", balance.initial},
        {"final", balance.final},
        {"inflow", balance.inflow},
        {"outflow", balance.outflow},
        {"internal_transfer", balance.internal_transfer},
        {"clamped", balance.clamped},
        {"merge_adjustment", balance.merge_adjustment},
        {"residual", balance.residual},
        {"relative_residual", balance.relative_residual}}},
      {"mass_closure_residual", balance.residual},
      {"compatibility",
       {{"tolerance", kCompatibilityTolerance},
        {"handoff_velocity", run.handoff_velocity},
        {"residual", optional_number(run.compatibility_residual)},
        {"handoff_velocity_stop_line", run.handoff_velocity_stop_line},
        {"residual_stop_line", optional_number(run.compatibility_residual_stop_line)}}},
      {"snapping", {{"split", snap_json(run.split)}, {"stop", snap_json(run.stop)}}},
  };
  double wall = 0.0;
  for (const auto& pr : run.phases) wall += pr.wall_seconds;
  report["timing"] = {{"total_wall_seconds", wall}};
  if (extras.oracle) {
    const auto& o = *extras.oracle;
    report["oracle"] = {{"n_cells", o.n_cells},     {"horizon", o.horizon},
                        {"breakdown_time", o.breakdown_time}, {"l1_rho", o.l1_rho},
                        {"l1_v", o.l1_v},           {"oracle_steps", o.oracle_steps}};
  } else {
    report["oracle"] = nullptr;
  }
  return report.dump(2) + "\n";
}

void write_report(const Scenario& s, const SimulationRun& run, const fs::path& path,
                  const ReportExtras& extras) {
  write_text(path, report_json(s, run, extras));
}

namespace {

std::string colour(double u) {
  // viridis, five stops
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                               {59, 82, 139},
                                                               {33, 145, 140},
                                                               {94, 201, 98},
                                                               {253, 231, 37}}};
  u = std::clamp(std::isfinite(u) ? u : 0.0, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(u), stops.size() - 2);
  const double w = u - k;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[k][0] + w * (stops[k + 1][0] - stops[k][0]))),
                static_cast<int>(std::lround(stops[k][1] + w * (stops[k + 1][1] - stops[k][1]))),
                static_cast<int>(std::lround(stops[k][2] + w * (stops[k + 1][2] - stops[k][2]))));
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void emit_plot(const std::vector<const Trajectory*>& trajectories, PlotField field,
               const std::vector<PlotMarker>& markers, const fs::path& stem) {
  const bool density = field == PlotField::Density;
  auto values = [&](const FlowState& s) -> const std::vector<double>& { return density ? s.rho : s.v; };

  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  double tmin = vmin, tmax = -vmin, xmin = vmin, xmax = -vmin;
  std::string csv = "t,x,value\n";
  for (const Trajectory* tr : trajectories) {
    for (const auto& snap : tr->snapshots) {
      const auto& st = snap.state;
      tmin = std::min(tmin, st.t);
      tmax = std::max(tmax, st.t);
      xmin = std::min(xmin, st.grid.x_min);
      xmax = std::max(xmax, st.grid.x_max);
      const auto& val = values(st);
      for (int i = 0; i < st.grid.n_cells; ++i) {
        vmin = std::min(vmin, val[i]);
        vmax = std::max(vmax, val[i]);
        csv += format_double(st.t) + ',' + format_double(st.grid.center(i)) + ',' +
               format_double(val[i]) + '\n';
      }
    }
  }
  if (!std::isfinite(vmin)) throw Error("emit_plot: no snapshots to plot");
  if (!(tmax > tmin)) tmax = tmin + 1.0;
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  const double span = vmax > vmin ? vmax - vmin : 1.0;

  constexpr double W = 900, H = 560, L = 80, R = 150, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double t) { return L + (t - tmin) / (tmax - tmin) * pw; };
  auto py = [&](double x) { return T + ph - (x - xmin) / (xmax - xmin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g class=\"field\">\n";
  for (const Trajectory* tr : trajectories) {
    const auto& snaps = tr->snapshots;
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
      const auto& st = snaps[k].state;
      const double x0 = px(st.t), x1 = px(snaps[k + 1].state.t);
      const auto& val = values(st);
      for (int i = 0; i < st.grid.n_cells; ++i) {
        const double ytop = py(st.grid.face(i + 1)), ybot = py(st.grid.face(i));
        svg << "<rect x=\"" << short_number(x0) << "\" y=\"" << short_number(ytop) << "\" width=\""
            << short_number(x1 - x0 + 0.3) << "\" height=\"" << short_number(ybot - ytop + 0.3)
            << "\" fill=\"" << colour((val[i] - vmin) / span) << "\"/>\n";
      }
    }
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = tmin + k * (tmax - tmin) / 5, x = xmin + k * (xmax - xmin) / 5;
    svg << "<text x=\"" << px(t) << "\" y=\"" << T + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << short_number(t) << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(x) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << short_number(x) << "</text>\n";
  }
  svg << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15
      << "\" font-size=\"13\" text-anchor=\"middle\">time t (s)</text>\n";
  svg << "<text x=\"20\" y=\"" << T + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 20 " << T + ph / 2 << ")\">position x (m)</text>\n";
  for (const auto& m : markers) {
    const double x = px(m.t);
    svg << "<line class=\"phase-marker\" x1=\"" << x << "\" y1=\"" << T << "\" x2=\"" << x
        << "\" y2=\"" << T + ph << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
    svg << "<text x=\"" << x + 3 << "\" y=\"" << T - 6 << "\" font-size=\"11\">" << m.label
        << "</text>\n";
  }
  const double lx = W - R + 30, lw = 20;
  svg << "<g class=\"legend\" data-min=\"" << format_double(vmin) << "\" data-max=\""
      << format_double(vmax) << "\">\n";
  constexpr int kBands = 50;
  for (int k = 0; k < kBands; ++k) {
    svg << "<rect x=\"" << lx << "\" y=\"" << short_number(T + ph - (k + 1) * ph / kBands)
        << "\" width=\"" << lw << "\" height=\"" << short_number(ph / kBands + 0.3) << "\" fill=\""
        << colour((k + 0.5) / kBands) << "\"/>\n";
  }
  svg << "<text x=\"" << lx + lw + 5 << "\" y=\"" << T + 10 << "\" font-size=\"11\">max "
      << short_number(vmax) << "</text>\n";
  svg << "<text x=\"" << lx + lw + 5 << "\" y=\"" << T + ph << "\" font-size=\"11\">min "
      << short_number(vmin) << "</text>\n";
  svg << "<text x=\"" << lx << "\" y=\"" << T - 6 << "\" font-size=\"12\">"
      << (density ? "density (veh/m)" : "velocity (m/s)") << "</text>\n";
  svg << "</g>\n</svg>\n";

  fs::path csv_path = stem, svg_path = stem;
  csv_path += ".csv";
  svg_path += ".svg";
  write_text(csv_path, csv);
  write_text(svg_path, svg.str());
}

void emit_plot(const SimulationRun& run, const SignalTiming& timing, PlotField field,
               const fs::path& stem) {
  std::vector<const Trajectory*> trs;
  // the braking strip is drawn last so it stays visible where it overlaps the downstream one
  for (const char* name : {"free_flow", "downstream", "upstream", "resume"})
    if (const PhaseRun* pr = run.find(name)) trs.push_back(&pr->trajectory);
  emit_plot(trs, field,
            {{"flashing green", timing.braking_start()}, {"red", timing.t0},
             {"green", timing.green_time()}},
            stem);
}

}  // namespace sigflow
