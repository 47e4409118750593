#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sigflow/domain.hpp"
#include "sigflow/orchestrator.hpp"
#include "sigflow/verification.hpp"

namespace sigflow {

constexpr int kReportSchemaVersion = 1;

/// CSV with a "# t=<seconds>" comment line, then x,rho,v rows with
/// round-trip precision.
void write_snapshot(const FlowState& state, const std::filesystem::path& path);
std::string snapshot_csv(const FlowState& state);

/// Inverse of write_snapshot. The grid is rebuilt from the cell centres.
FlowState read_snapshot(const std::filesystem::path& path);
FlowState parse_snapshot_csv(const std::string& text);

/// Writes every snapshot of every phase as <dir>/<phase>/<index>.csv.
/// Returns the number of files written.
int write_snapshots(const SimulationRun& run, const std::filesystem::path& dir);

struct ReportExtras {
  std::optional<OracleComparison> oracle;
  std::string scenario_path;
};

/// JSON run report (schema version kReportSchemaVersion).
std::string report_json(const Scenario& s, const SimulationRun& run, const ReportExtras& extras = {});
void write_report(const Scenario& s, const SimulationRun& run, const std::filesystem::path& path,
                  const ReportExtras& extras = {});

enum class PlotField { Density, Velocity };

struct PlotMarker {
  std::string label;
  double t = 0.0;
};

/// Writes <stem>.csv (t,x,value for every snapshot) and <stem>.svg, a
/// space-time colour map with a vertical line per marker and a legend
/// spanning the value range.
void emit_plot(const std::vector<const Trajectory*>& trajectories, PlotField field,
               const std::vector<PlotMarker>& markers, const std::filesystem::path& stem);

/// Plots a whole signal cycle with markers at flashing green, red and green.
void emit_plot(const SimulationRun& run, const SignalTiming& timing, PlotField field,
               const std::filesystem::path& stem);

}  // namespace sigflow
