#pragma once

#include "sigflow/domain.hpp"

namespace sigflow {

/// Mean absolute difference per unit length, sum |a_i - b_i| dx / L.
double l1_error(const std::vector<double>& a, const std::vector<double>& b, const RoadGrid& grid);

struct OracleComparison {
  int n_cells = 0;
  double horizon = 0.0;
  double breakdown_time = 0.0;
  double l1_rho = 0.0;
  double l1_v = 0.0;
  int oracle_steps = 0;
};

/// Free-flow horizon usable for the oracle: the flashing-green time, capped
/// below the breakdown guard.
double oracle_horizon(const Scenario& s);

/// Runs the free-flow solver with n_cells cells and the mass-coordinate
/// oracle to `horizon`, and reports their L1 distance.
OracleComparison compare_with_oracle(const Scenario& s, int n_cells, double horizon);

}  // namespace sigflow
