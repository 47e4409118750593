#pragma once

#include <random>

#include "sigflow/domain.hpp"

namespace sigflow::testing {

// Stop line at 600 m on a 1 km road, one red phase.
inline Scenario reference_scenario(Model model = Model::First) {
  Scenario s;
  s.model = model;
  s.grid = RoadGrid{0.0, 1000.0, 200};
  s.rho0 = Profile::sine(0.05, 0.005, 500.0);
  s.v0 = Profile::constant(10.0);
  s.inflow = BoundaryData{Profile::constant(0.05), Profile::constant(10.0)};
  s.timing = SignalTiming{600.0, 40.0, 5.0, 30.0, 50.0};
  s.force = ForceLaw{1.5, 16.0, 4.0};
  s.mu = 5.0;
  s.t_end = 100.0;
  return s;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace sigflow::testing
