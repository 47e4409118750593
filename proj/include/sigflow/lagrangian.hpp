#pragma once

#include <limits>
#include <vector>

#include "sigflow/domain.hpp"

namespace sigflow::lagrangian {

/// Density and velocity as functions of the mass coordinate xi (vehicles
/// counted from the road origin) at time t.
struct MassField {
  double origin = 0.0;  ///< physical position of xi = 0
  std::vector<double> xi;
  std::vector<double> rho_hat;
  std::vector<double> v_hat;
  double t = 0.0;
  double a_integral = 0.0;  ///< cumulative inflow flux since the field was created
};

/// Mass coordinates of the samples x_min, every cell centre and x_max
/// (end values linearly extrapolated). Throws InvariantError on rho <= 0.
MassField to_mass_coordinates(const FlowState& state);

/// Monotone piecewise-linear map xi -> x.
class PositionMap {
 public:
  PositionMap(std::vector<double> xi, std::vector<double> x);
  /// Throws std::out_of_range outside [xi.front(), xi.back()].
  double operator()(double xi) const;
  double xi_max() const { return xi_.back(); }
  const std::vector<double>& positions() const { return x_; }

 private:
  std::vector<double> xi_;
  std::vector<double> x_;
};

/// Positions of the field's samples, built from dx = 2 dxi / (rho_a + rho_b)
/// so that it inverts the trapezoid rule of to_mass_coordinates exactly.
PositionMap invert_initial_map(const MassField& field);

/// Integrates the mass-coordinate system along its characteristics
/// dxi/dt = rho_in * v_in. Throws BreakdownError when a specific volume
/// reaches zero (physical characteristics crossing).
MassField advance_characteristics(const MassField& field, const BoundaryData& inflow,
                                  const ForceOption& force, double t_end, int n_steps);

/// Samples the field on `grid` at cell centres. Throws when a centre lies
/// outside the mapped range or any rho_hat is not positive.
FlowState reconstruct_physical(const MassField& field, const RoadGrid& grid);

/// First crossing time of physical characteristics, -1 / min dv0/dx, or
/// +infinity for non-decreasing velocity. Valid while F is uniform over the profile.
double estimate_breakdown_time(const FlowState& state, const ForceOption& force);

constexpr double kNoBreakdown = std::numeric_limits<double>::infinity();
/// Oracle results are only reported before this fraction of the breakdown time.
constexpr double kBreakdownSafety = 0.5;

/// Full oracle pipeline: transform, advance to t_end, reconstruct on `output`.
/// Refuses horizons at or beyond kBreakdownSafety * breakdown time.
FlowState solve_oracle(const FlowState& initial, const BoundaryData& inflow,
                       const ForceOption& force, double t_end, int n_steps,
                       const RoadGrid& output);

}  // namespace sigflow::lagrangian
