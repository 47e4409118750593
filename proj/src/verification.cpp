#include "sigflow/verification.hpp"

#include <algorithm>
#include <cmath>

#include "sigflow/error.hpp"
#include "sigflow/hyperbolic.hpp"
#include "sigflow/lagrangian.hpp"

namespace sigflow {

double l1_error(const std::vector<double>& a, const std::vector<double>& b, const RoadGrid& grid) {
  if (a.size() != b.size() || static_cast<int>(a.size()) != grid.n_cells)
    throw InvariantError("l1_error", "size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum * grid.dx() / grid.length();
}

double oracle_horizon(const Scenario& s) {
  const auto initial = FlowState::sample(s.grid, s.rho0, s.v0, 0.0);
  const double t_star = lagrangian::estimate_breakdown_time(initial, s.force);
  const double guard = 0.9 * lagrangian::kBreakdownSafety * t_star;
  return std::min({s.timing.braking_start(), guard, s.t_end});
}

OracleComparison compare_with_oracle(const Scenario& s, int n_cells, double horizon) {
  RoadGrid grid = s.grid;
  grid.n_cells = n_cells;
  const auto initial = FlowState::sample(grid, s.rho0, s.v0, 0.0);

  hyperbolic::Problem p;
  p.initial = initial;
  p.boundary.left = hyperbolic::Inflow{s.inflow};
  p.boundary.right = hyperbolic::Outflow{};
  p.force = s.force;
  p.t_end = horizon;
  p.snapshot_interval = horizon;
  p.cfl = s.numerics.cfl;
  const auto numeric = hyperbolic::solve(p).final_state();

  // characteristics start from a finer sampling than the solver grid
  RoadGrid fine = s.grid;
  fine.n_cells = std::max(1000, 4 * n_cells);
  const auto fine_initial = FlowState::sample(fine, s.rho0, s.v0, 0.0);
  const double spacing = fine_initial.total_mass() / (fine.n_cells + 1);
  double entering = 0.0;
  constexpr int kSamples = 400;
  for (int k = 0; k < kSamples; ++k)
    entering += s.inflow.flux((k + 0.5) * horizon / kSamples) * horizon / kSamples;
  const int steps = std::clamp(static_cast<int>(std::ceil(entering / spacing)), 200, 200000);
  const auto exact =
      lagrangian::solve_oracle(fine_initial, s.inflow, s.force, horizon, steps, grid);

  OracleComparison c;
  c.n_cells = n_cells;
  c.horizon = horizon;
  c.breakdown_time = lagrangian::estimate_breakdown_time(initial, s.force);
  c.l1_rho = l1_error(numeric.rho, exact.rho, grid);
  c.l1_v = l1_error(numeric.v, exact.v, grid);
  c.oracle_steps = steps;
  return c;
}

}  // namespace sigflow
