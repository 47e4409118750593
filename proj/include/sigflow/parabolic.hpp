#pragma once

#include <optional>
#include <vector>

#include "sigflow/domain.hpp"
#include "sigflow/trajectory.hpp"

namespace sigflow::parabolic {

/// Density floor inside the diffusion coefficient mu / rho; nodes at or below
/// it are treated as empty road and get no acceleration.
constexpr double kDensityFloor = 1e-9;

/// [left, right(t)] carrying a fixed number of uniform cells that stretch with the boundary.
struct MovingDomain {
  double left = 0.0;
  Profile right;
  int n_cells = 4;

  static MovingDomain fixed(double left, double right, int n_cells);
  double right_at(double t) const { return right(t); }
  double length(double t) const { return right(t) - left; }
};

/// State on the unit interval: densities on the n cells, velocities on the n + 1 nodes.
struct UnitState {
  std::vector<double> rho;
  std::vector<double> v;
  double t = 0.0;

  int n_cells() const { return static_cast<int>(rho.size()); }
};

/// Boundary data of the viscous system. The left end always has Dirichlet
/// velocity and inflow density; the right end has a Dirichlet velocity or,
/// when `right_v` is empty, a zero-gradient outflow node. Density at the
/// right end is always taken from the last cell.
struct Boundary {
  Profile left_v = Profile::constant(0.0);
  Profile left_rho = Profile::constant(0.0);
  std::optional<Profile> right_v;
};

/// Resamples a physical state onto the domain's unit grid at time t.
/// Grids that already coincide are copied without interpolation.
UnitState rescale_to_unit(const FlowState& state, const MovingDomain& domain, double t);

/// Maps a unit state back onto [left, right(t)]; cell velocity is the mean of its two nodes.
FlowState rescale_from_unit(const UnitState& state, const MovingDomain& domain);

/// Mass-conserving remap of a unit state onto an arbitrary grid covering the same interval.
FlowState remap_to_grid(const UnitState& state, const MovingDomain& domain, const RoadGrid& target);

struct StepOptions {
  double mu = 1.0;
  ForceOption force;
  double dt_cap = 1e-3;
};

struct StepResult {
  UnitState state;
  double mass_in = 0.0;
  double mass_out = 0.0;
  double clamped = 0.0;  ///< vehicles added by clamping negative cells
};

/// One semi-implicit step: explicit upwind advection (relative to the moving
/// mesh) and force, implicit diffusion, then conservative upwind density update.
StepResult step_viscous(const UnitState& state, double dt, const StepOptions& options,
                        const Boundary& boundary, const MovingDomain& domain);

struct Problem {
  FlowState initial;
  MovingDomain domain;
  Boundary boundary;
  double mu = 1.0;
  ForceOption force;
  double t_end = 0.0;
  double snapshot_interval = 1.0;
  double dt = 1e-3;
  /// When > 0, snapshots whose domain length is a whole multiple of this width
  /// are remapped onto cells of this width.
  double output_dx = 0.0;
  /// Velocity of the preceding solution at the start of the right boundary.
  std::optional<double> handoff_velocity;
};

Trajectory solve(const Problem& problem);

}  // namespace sigflow::parabolic
