#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigflow/domain.hpp"

namespace sigflow {

/// Cumulative mass bookkeeping of one solve, in vehicles.
struct MassLedger {
  double total = 0.0;    ///< mass on the grid at this instant
  double inflow = 0.0;   ///< cumulative mass through the left boundary (signed, into the domain)
  double outflow = 0.0;  ///< cumulative mass through the right boundary (signed, out of the domain)
  double clamped = 0.0;  ///< mass added by clamping negative cells to zero

  /// total - (initial + inflow - outflow + clamped)
  double residual(double initial_total) const {
    return total - (initial_total + inflow - outflow + clamped);
  }
};

/// Velocities on the two end nodes of a viscous solve.
struct BoundaryNodes {
  double left_x = 0.0;
  double left_v = 0.0;
  double right_x = 0.0;
  double right_v = 0.0;
};

struct Snapshot {
  FlowState state;
  MassLedger ledger;
  std::optional<BoundaryNodes> nodes;  ///< set by the viscous solver
};

/// Output of one solver run: time-ordered snapshots with their mass ledgers.
struct Trajectory {
  std::vector<Snapshot> snapshots;
  double initial_mass = 0.0;
  std::optional<double> compatibility_residual;  ///< |V(start) - handoff speed|, viscous runs only
  int steps = 0;

  const Snapshot& final() const { return snapshots.back(); }
  const FlowState& final_state() const { return snapshots.back().state; }
};

}  // namespace sigflow
