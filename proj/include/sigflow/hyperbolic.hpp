#pragma once

#include <variant>
#include <vector>

#include "sigflow/domain.hpp"
#include "sigflow/trajectory.hpp"

namespace sigflow::hyperbolic {

/// Cells lighter than this are vacuum: velocity 0, no momentum.
constexpr double kVacuumDensity = 1e-12;
/// Lower bound on the wave speed used by cfl_dt.
constexpr double kSpeedFloor = 1e-8;
/// dt may exceed the stability limit dx / max speed by this factor before step() rejects it.
constexpr double kCflSlack = 1.01;

/// Mass m = rho and momentum q = rho * v per cell.
struct ConservedState {
  RoadGrid grid;
  std::vector<double> m;
  std::vector<double> q;
  double t = 0.0;
};

ConservedState to_conserved(const FlowState& s);
FlowState to_flow(const ConservedState& s);

struct Primitive {
  double rho = 0.0;
  double v = 0.0;
};

struct Flux {
  double mass = 0.0;
  double momentum = 0.0;
};

struct Inflow {
  BoundaryData data;
};
struct Vacuum {};
struct Outflow {};

struct Boundary {
  std::variant<Inflow, Vacuum> left = Vacuum{};
  std::variant<Outflow, Vacuum> right = Outflow{};
};

/// Rusanov flux of the pressureless system, wave speed max(|v_L|, |v_R|).
Flux numerical_flux(Primitive left, Primitive right);

/// cfl * dx / max(max |v|, kSpeedFloor).
double cfl_dt(const FlowState& state, double cfl);

struct StepResult {
  ConservedState state;
  double mass_in = 0.0;   ///< vehicles entering through the left face
  double mass_out = 0.0;  ///< vehicles leaving through the right face
  double clamped = 0.0;   ///< vehicles added by clamping negative cells
};

/// One transport step followed by the force source update.
/// Throws CflError when dt exceeds the stability limit by more than 1%.
StepResult step(const ConservedState& state, double dt, const Boundary& boundary,
                const ForceOption& force);

struct Problem {
  FlowState initial;
  Boundary boundary;
  ForceOption force;
  double t_end = 0.0;
  double snapshot_interval = 1.0;
  double cfl = 0.5;
};

/// Advances to t_end, recording a snapshot every snapshot_interval and at t_end.
Trajectory solve(const Problem& problem);

}  // namespace sigflow::hyperbolic
