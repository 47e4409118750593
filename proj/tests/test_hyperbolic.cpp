#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sigflow/error.hpp"
#include "sigflow/hyperbolic.hpp"
#include "support.hpp"

using namespace sigflow;
namespace hy = sigflow::hyperbolic;

namespace {

FlowState uniform_state(int n, double length, double rho, double v) {
  return FlowState::sample(RoadGrid{0.0, length, n}, Profile::constant(rho), Profile::constant(v));
}

hy::Boundary inflow(double rho, double v) {
  return {hy::Inflow{BoundaryData{Profile::constant(rho), Profile::constant(v)}}, hy::Outflow{}};
}

}  // namespace

TEST_CASE("numerical flux examples") {
  const auto same = hy::numerical_flux({0.1, 10.0}, {0.1, 10.0});
  CHECK(same.mass == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(same.momentum == doctest::Approx(10.0).epsilon(1e-15));
  const auto vac = hy::numerical_flux({0.0, 0.0}, {0.0, 0.0});
  CHECK(vac.mass == 0.0);
  CHECK(vac.momentum == 0.0);
  CHECK(hy::numerical_flux({0.1, 10.0}, {0.1, 0.0}).mass == doctest::Approx(0.5));
}

TEST_CASE("numerical flux is consistent with the exact flux") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    const double r = testing::uniform(rng, 0.0, 1.0), v = testing::uniform(rng, 0.0, 30.0);
    const auto f = hy::numerical_flux({r, v}, {r, v});
    CHECK(f.mass == doctest::Approx(r * v).epsilon(1e-14));
    CHECK(f.momentum == doctest::Approx(r * v * v).epsilon(1e-14));
  }
}

TEST_CASE("cfl_dt examples") {
  CHECK(hy::cfl_dt(uniform_state(10, 10.0, 0.1, 10.0), 0.5) == doctest::Approx(0.05));
  CHECK(hy::cfl_dt(uniform_state(10, 10.0, 0.1, 0.0), 0.5) == doctest::Approx(5e7));
  CHECK(hy::cfl_dt(uniform_state(10, 5.0, 0.1, 20.0), 0.9) == doctest::Approx(0.0225));
}

TEST_CASE("conserved round trip treats light cells as vacuum") {
  const auto g = RoadGrid{0.0, 4.0, 4};
  const auto s = FlowState::make(g, {0.0, 1e-14, 0.2, 0.3}, {0.0, 5.0, 2.0, 3.0}, 1.0);
  const auto back = hy::to_flow(hy::to_conserved(s));
  CHECK(back.rho == s.rho);
  CHECK(back.v[1] == 0.0);
  CHECK(back.v[2] == doctest::Approx(2.0));
  CHECK(back.t == 1.0);
}

TEST_CASE("uniform state is a fixed point without force") {
  const auto s = uniform_state(50, 100.0, 0.1, 10.0);
  const auto r = hy::step(hy::to_conserved(s), 0.1, inflow(0.1, 10.0), std::nullopt);
  const auto out = hy::to_flow(r.state);
  for (int i = 0; i < 50; ++i) {
    CHECK(out.rho[i] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.v[i] == doctest::Approx(10.0).epsilon(1e-15));
  }
  CHECK(r.mass_in == doctest::Approx(0.1));
  CHECK(r.mass_out == doctest::Approx(0.1));
}

TEST_CASE("uniform state accelerates by f0 dt") {
  const auto s = uniform_state(20, 100.0, 0.1, 5.0);
  const auto r = hy::step(hy::to_conserved(s), 0.1, inflow(0.1, 5.0), ForceLaw{1.5, 16.0, 4.0});
  const auto out = hy::to_flow(r.state);
  for (int i = 0; i < 20; ++i) CHECK(out.v[i] == doctest::Approx(5.15).epsilon(1e-14));
}

TEST_CASE("vacuum left boundary leaves a resting boundary cell alone") {
  const auto g = RoadGrid{0.0, 10.0, 10};
  const auto s = FlowState::sample(g, Profile::linear(0.1, 0.01), Profile::constant(0.0));
  const auto r = hy::step(hy::to_conserved(s), 0.1, hy::Boundary{hy::Vacuum{}, hy::Outflow{}},
                          std::nullopt);
  CHECK(r.state.m[0] == s.rho[0]);
  CHECK(r.mass_in == 0.0);
}

TEST_CASE("step conserves mass against its boundary fluxes") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = RoadGrid{0.0, 200.0, 80};
    const double a = testing::uniform(rng, 0.0, 0.05), wl = testing::uniform(rng, 20.0, 300.0);
    const auto s = FlowState::sample(g, Profile::sine(0.1, a, wl), Profile::sine(10.0, 3.0, wl, 1.0));
    const double dt = 0.9 * hy::cfl_dt(s, 1.0);
    const auto r = hy::step(hy::to_conserved(s), dt, inflow(0.08, 9.0), ForceLaw{1.5, 16.0, 4.0});
    const double after = hy::to_flow(r.state).total_mass();
    CHECK(after - s.total_mass() == doctest::Approx(r.mass_in - r.mass_out + r.clamped).epsilon(1e-12));
    CHECK(r.clamped == 0.0);
    for (double m : r.state.m) CHECK(m >= 0.0);
  }
}

TEST_CASE("step rejects dt beyond the CFL slack") {
  const auto s = uniform_state(10, 10.0, 0.1, 10.0);
  const auto c = hy::to_conserved(s);
  CHECK_NOTHROW(hy::step(c, 0.1005, inflow(0.1, 10.0), std::nullopt));
  CHECK_THROWS_AS(hy::step(c, 0.102, inflow(0.1, 10.0), std::nullopt), CflError);
}

TEST_CASE("overshooting steps clamp negative mass into the ledger") {
  const auto g = RoadGrid{0.0, 5.0, 5};
  const auto s = FlowState::make(g, {0, 0, 1.0, 0, 0}, {0, 0, 10.0, 0, 0}, 0.0);
  const auto r = hy::step(hy::to_conserved(s), 0.101, hy::Boundary{hy::Vacuum{}, hy::Outflow{}},
                          std::nullopt);
  CHECK(r.state.m[2] == 0.0);
  CHECK(r.clamped == doctest::Approx(0.01));
  CHECK(r.state.q[2] == 0.0);
}

TEST_CASE("solve lands snapshots on the requested times") {
  hy::Problem p{uniform_state(40, 400.0, 0.1, 10.0), inflow(0.1, 10.0), std::nullopt, 2.5, 1.0, 0.5};
  const auto tr = hy::solve(p);
  REQUIRE(tr.snapshots.size() == 4);
  CHECK(tr.snapshots[0].state.t == 0.0);
  CHECK(tr.snapshots[1].state.t == 1.0);
  CHECK(tr.snapshots[2].state.t == 2.0);
  CHECK(tr.snapshots[3].state.t == 2.5);
  p.t_end = -1.0;
  CHECK_THROWS_AS(hy::solve(p), InvariantError);
}

TEST_CASE("cars at rest stay at rest without force") {
  const auto g = RoadGrid{0.0, 500.0, 100};
  const auto s = FlowState::sample(g, Profile::sine(0.1, 0.05, 130.0), Profile::constant(0.0));
  const hy::Problem p{s, hy::Boundary{hy::Vacuum{}, hy::Outflow{}}, std::nullopt, 10.0, 5.0, 0.5};
  const auto out = hy::solve(p).final_state();
  CHECK(out.rho == s.rho);
  CHECK(out.v == s.v);
}

TEST_CASE("uniform acceleration is exact") {
  const auto s = uniform_state(100, 1000.0, 0.1, 5.0);
  BoundaryData in{Profile::constant(0.1), Profile::linear(5.0, 1.5)};
  const hy::Problem p{s, {hy::Inflow{in}, hy::Outflow{}}, ForceLaw{1.5, 16.0, 4.0}, 2.0, 1.0, 0.5};
  const auto out = hy::solve(p).final_state();
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(out.v[i] - 8.0) < 1e-8);
    CHECK(std::abs(out.rho[i] - 0.1) < 1e-12);
  }
}

TEST_CASE("vacuum stays empty without inflow") {
  const auto g = RoadGrid{0.0, 500.0, 100};
  const auto s = FlowState::sample(g, Profile::plateau(0.0, 0.1, 250.0, 400.0, 20.0),
                                   Profile::constant(8.0));
  const hy::Problem p{s, hy::Boundary{hy::Vacuum{}, hy::Outflow{}}, ForceLaw{1.5, 16.0, 4.0},
                      5.0, 1.0, 0.5};
  for (const auto& snap : hy::solve(p).snapshots)
    for (int i = 0; i < 40; ++i) CHECK(snap.state.rho[i] == 0.0);  // x < 200
}

TEST_CASE("solve ledger closes on random smooth data") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = RoadGrid{0.0, 1000.0, 100};
    const auto s = FlowState::sample(g, Profile::sine(0.1, testing::uniform(rng, 0.0, 0.05), 250.0),
                                     Profile::sine(10.0, testing::uniform(rng, 0.0, 3.0), 400.0));
    const hy::Problem p{s, inflow(0.1, 10.0), ForceLaw{1.5, 16.0, 4.0}, 20.0, 2.0, 0.5};
    const auto tr = hy::solve(p);
    for (const auto& snap : tr.snapshots) {
      CHECK(std::abs(snap.ledger.residual(tr.initial_mass)) <= 1e-10 * (snap.ledger.total + 1.0));
      CHECK(snap.ledger.clamped <= 1e-8 * snap.ledger.total);
    }
  }
}
