#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigflow/domain.hpp"
#include "sigflow/trajectory.hpp"

namespace sigflow {

enum class SolverKind { Hyperbolic, Viscous };

const char* to_string(SolverKind k);
const char* to_string(Model m);

/// One solver run of the signal cycle.
struct Phase {
  std::string name;  ///< "free_flow", "upstream", "downstream" or "resume"
  double t_start = 0.0;
  double t_end = 0.0;
  SolverKind solver = SolverKind::Hyperbolic;
  double x_lo = 0.0;
  double x_hi_start = 0.0;  ///< right end at t_start
  double x_hi_end = 0.0;    ///< right end at t_end (differs for the braking boundary)
  std::string left_boundary;
  std::string right_boundary;
  bool force = false;
};

struct PhasePlan {
  std::vector<Phase> phases;
};

/// Position of the grid face nearest a requested point.
struct FaceSnap {
  double requested = 0.0;
  double position = 0.0;
  int face = 0;
  double shift = 0.0;  ///< position - requested
};

FaceSnap snap_to_face(const RoadGrid& grid, double x);

/// Phase sequence for the scenario's model with x0 - h and x0 snapped to faces.
PhasePlan build_phase_plan(const Scenario& s);

struct SplitResult {
  FlowState upstream;
  FlowState downstream;
  FaceSnap snap;
};

/// Partitions the cells at the face nearest x_split. Each side needs >= 4 cells.
SplitResult split_at(const FlowState& state, double x_split);

/// Upstream cells for x < x_stop, downstream cells for x >= x_stop, on `full`.
/// Both inputs must sit on faces of `full` and share the time t_merge.
FlowState merge(const FlowState& upstream, const FlowState& downstream, double x_stop,
                double t_merge, const RoadGrid& full);

struct PhaseRun {
  Phase phase;
  Trajectory trajectory;
  double wall_seconds = 0.0;
};

struct SimulationRun {
  Model model = Model::First;
  PhasePlan plan;
  std::vector<PhaseRun> phases;
  FaceSnap split;  ///< x0 - h
  FaceSnap stop;   ///< x0
  double handoff_velocity = 0.0;            ///< free-flow velocity on the split face
  double handoff_velocity_stop_line = 0.0;  ///< same, on the stop-line face
  std::optional<double> compatibility_residual;            ///< |V(t0 - tau0) - handoff_velocity|
  std::optional<double> compatibility_residual_stop_line;  ///< against the stop-line reading
  std::optional<FlowState> merged;
  double merge_adjustment = 0.0;  ///< merged mass minus the two flows' masses
  std::string failed_phase;
  std::string error;

  bool ok() const { return failed_phase.empty(); }
  const PhaseRun* find(const std::string& name) const;
};

SimulationRun run_first_model(const Scenario& s);
SimulationRun run_second_model(const Scenario& s);
/// Dispatches on s.model.
SimulationRun run_model(const Scenario& s);

struct PhaseBalance {
  std::string name;
  double initial = 0.0;
  double final = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
  double clamped = 0.0;
  double residual = 0.0;  ///< worst snapshot residual of the phase ledger
};

struct MassBalanceReport {
  std::vector<PhaseBalance> phases;
  double initial = 0.0;
  double final = 0.0;
  double inflow = 0.0;   ///< through the road's left end
  double outflow = 0.0;  ///< through the road's right end
  double internal_transfer = 0.0;  ///< net flux through the braking boundary and the split
  double clamped = 0.0;
  double merge_adjustment = 0.0;
  double residual = 0.0;           ///< chained closure over all phases
  double relative_residual = 0.0;  ///< residual / max(1e-300, largest mass seen)
};

MassBalanceReport mass_balance_report(const SimulationRun& run);

}  // namespace sigflow
