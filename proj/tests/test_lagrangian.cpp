#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sigflow/error.hpp"
#include "sigflow/hyperbolic.hpp"
#include "sigflow/lagrangian.hpp"
#include "sigflow/verification.hpp"
#include "support.hpp"

using namespace sigflow;
namespace lg = sigflow::lagrangian;

namespace {

const BoundaryData kNoInflow{};

FlowState sampled(double x_min, double x_max, int n, Profile rho, Profile v) {
  return FlowState::sample(RoadGrid{x_min, x_max, n}, rho, v);
}

}  // namespace

TEST_CASE("mass coordinate of constant and linear densities") {
  const auto f = lg::to_mass_coordinates(sampled(0, 100, 50, Profile::constant(0.1), Profile::constant(5)));
  CHECK(f.xi.front() == 0.0);
  CHECK(f.xi.back() == doctest::Approx(10.0).epsilon(1e-14));
  const auto g = lg::to_mass_coordinates(sampled(0, 1, 40, Profile::linear(0.1, 0.05), Profile::constant(5)));
  CHECK(g.xi.back() == doctest::Approx(0.125).epsilon(1e-13));
  for (std::size_t k = 1; k < g.xi.size(); ++k) CHECK(g.xi[k] > g.xi[k - 1]);
}

TEST_CASE("a vacuum cell makes the map non-invertible") {
  const auto g = RoadGrid{0, 10, 5};
  const auto s = FlowState::make(g, {0.1, 0.1, 0.0, 0.1, 0.1}, {1, 1, 1, 1, 1}, 0.0);
  CHECK_THROWS_AS(lg::to_mass_coordinates(s), InvariantError);
}

TEST_CASE("inverse map of a constant density") {
  const auto f = lg::to_mass_coordinates(sampled(0, 100, 20, Profile::constant(0.1), Profile::constant(5)));
  const auto map = lg::invert_initial_map(f);
  CHECK(map(0.0) == 0.0);
  for (double xi : {0.5, 2.0, 7.25, 10.0}) CHECK(map(xi) == doctest::Approx(10.0 * xi).epsilon(1e-13));
  CHECK_THROWS_AS(map(10.5), std::out_of_range);
  CHECK_THROWS_AS(map(-0.1), std::out_of_range);
}

TEST_CASE("inverse map round trip on random densities") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = sampled(0, 500, 100,
                           Profile::sine(0.1, testing::uniform(rng, 0.0, 0.09), testing::uniform(rng, 20, 400)),
                           Profile::constant(5));
    const auto f = lg::to_mass_coordinates(s);
    const auto map = lg::invert_initial_map(f);
    // sample k sits at cell centre k - 1
    for (int i = 0; i < 100; ++i) CHECK(std::abs(map(f.xi[i + 1]) - s.grid.center(i)) <= 2.5);
  }
}

TEST_CASE("without inflow or force the characteristics are frozen") {
  const auto s = sampled(0, 300, 60, Profile::sine(0.1, 0.03, 100), Profile::sine(10, 2, 170));
  const auto f = lg::to_mass_coordinates(s);
  const auto out = lg::advance_characteristics(f, kNoInflow, std::nullopt, 3.0, 30);
  CHECK(out.xi == f.xi);
  CHECK(out.v_hat == f.v_hat);
  CHECK(out.a_integral == 0.0);
  CHECK(out.t == 3.0);

  const auto u = lg::to_mass_coordinates(sampled(0, 300, 60, Profile::sine(0.1, 0.03, 100), Profile::constant(9)));
  const auto uo = lg::advance_characteristics(u, kNoInflow, std::nullopt, 3.0, 30);
  CHECK(uo.xi == u.xi);
  CHECK(uo.v_hat == u.v_hat);
  for (std::size_t k = 0; k < u.rho_hat.size(); ++k)
    CHECK(uo.rho_hat[k] == doctest::Approx(u.rho_hat[k]).epsilon(1e-15));
}

TEST_CASE("uniform force shifts every characteristic speed") {
  const auto s = sampled(0, 300, 60, Profile::constant(0.1), Profile::sine(6, 1, 150));
  const auto f = lg::to_mass_coordinates(s);
  const auto out = lg::advance_characteristics(f, kNoInflow, ForceLaw{1.5, 16.0, 4.0}, 2.0, 20);
  for (std::size_t k = 0; k < f.v_hat.size(); ++k)
    CHECK(out.v_hat[k] == doctest::Approx(f.v_hat[k] + 3.0).epsilon(1e-13));
}

TEST_CASE("the ramp is integrated accurately") {
  const auto s = sampled(0, 100, 10, Profile::constant(0.1), Profile::constant(11.0));
  const ForceLaw law{1.5, 16.0, 4.0};
  const auto out = lg::advance_characteristics(lg::to_mass_coordinates(s), kNoInflow, law, 4.0, 4);
  // 11 -> 12 at f0 in 2/3 s, then v = 16 - 4 exp(-(3/8)(t - 2/3))
  const double expected = 16.0 - 4.0 * std::exp(-0.375 * (4.0 - 2.0 / 3.0));
  for (double v : out.v_hat) CHECK(v == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("closed systems keep their total mass coordinate") {
  const auto s = sampled(0, 400, 80, Profile::sine(0.1, 0.02, 130), Profile::linear(5, 0.01));
  const auto f = lg::to_mass_coordinates(s);
  const auto out = lg::advance_characteristics(f, kNoInflow, ForceLaw{1.5, 16.0, 4.0}, 5.0, 50);
  CHECK(out.xi.back() - out.xi.front() == f.xi.back() - f.xi.front());
}

TEST_CASE("inflow seeds new characteristics at the entrance") {
  const auto s = sampled(0, 200, 40, Profile::constant(0.1), Profile::constant(10));
  const BoundaryData in{Profile::constant(0.1), Profile::constant(10.0)};
  const auto out = lg::advance_characteristics(lg::to_mass_coordinates(s), in, std::nullopt, 5.0, 100);
  CHECK(out.a_integral == doctest::Approx(5.0));
  CHECK(out.xi.front() == 0.0);
  CHECK(out.xi.size() > 42);
  const auto rec = lg::reconstruct_physical(out, s.grid);
  for (int i = 0; i < 40; ++i) {
    CHECK(rec.rho[i] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rec.v[i] == doctest::Approx(10.0).epsilon(1e-12));
  }
  const BoundaryData empty_entry{Profile::constant(0.0), Profile::constant(10.0)};
  CHECK_NOTHROW(lg::advance_characteristics(lg::to_mass_coordinates(s), empty_entry, std::nullopt, 5.0, 10));
}

TEST_CASE("crossing characteristics are reported as breakdown") {
  const auto s = sampled(0, 100, 50, Profile::constant(0.1), Profile::linear(10.0, -0.1));
  const auto f = lg::to_mass_coordinates(s);
  CHECK_THROWS_AS(lg::advance_characteristics(f, kNoInflow, std::nullopt, 12.0, 120), BreakdownError);
  CHECK_NOTHROW(lg::advance_characteristics(f, kNoInflow, std::nullopt, 4.0, 40));
  CHECK_THROWS_AS(lg::solve_oracle(s, kNoInflow, std::nullopt, 5.0, 50, s.grid), BreakdownError);
}

TEST_CASE("reconstruction of a constant field") {
  lg::MassField f{0.0, {0.0, 2.5, 5.0, 7.5, 10.0}, std::vector<double>(5, 0.1), std::vector<double>(5, 3.0), 0.0, 0.0};
  const auto map = lg::invert_initial_map(f);
  CHECK(map.positions().front() == 0.0);
  CHECK(map.positions().back() == doctest::Approx(100.0).epsilon(1e-14));
  const auto s = lg::reconstruct_physical(f, RoadGrid{0.0, 100.0, 10});
  for (double r : s.rho) CHECK(r == doctest::Approx(0.1));
  f.rho_hat[2] = 0.0;
  CHECK_THROWS(lg::reconstruct_physical(f, RoadGrid{0.0, 100.0, 10}));
}

TEST_CASE("transform round trip on random positive states") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = sampled(-50, 450, 120,
                           Profile::sine(0.1, testing::uniform(rng, 0, 0.09), testing::uniform(rng, 30, 500),
                                         testing::uniform(rng, 0, 6)),
                           Profile::sine(10, testing::uniform(rng, 0, 9), testing::uniform(rng, 30, 500)));
    const auto back = lg::reconstruct_physical(lg::to_mass_coordinates(s), s.grid);
    for (int i = 0; i < 120; ++i) {
      CHECK(std::abs(back.rho[i] - s.rho[i]) <= 1e-8 * std::abs(s.rho[i]));
      CHECK(std::abs(back.v[i] - s.v[i]) <= 1e-8 * std::max(1.0, std::abs(s.v[i])));
    }
  }
}

TEST_CASE("breakdown time estimates") {
  CHECK(lg::estimate_breakdown_time(sampled(0, 100, 50, Profile::constant(0.1), Profile::linear(5, 0.1)),
                                    std::nullopt) == lg::kNoBreakdown);
  CHECK(lg::estimate_breakdown_time(sampled(0, 100, 50, Profile::constant(0.1), Profile::linear(10, -0.1)),
                                    std::nullopt) == doctest::Approx(10.0));
  CHECK(lg::estimate_breakdown_time(sampled(0, 10, 50, Profile::constant(0.1), Profile::linear(10, -0.5)),
                                    ForceLaw{1.5, 16.0, 4.0}) == doctest::Approx(2.0));
}

TEST_CASE("free-flow solver converges to the oracle") {
  auto s = testing::reference_scenario();
  s.rho0 = Profile::sine(0.1, 0.02, 200.0);
  s.inflow = BoundaryData{Profile::constant(0.1), Profile::constant(10.0)};
  s.force.reset();
  const auto coarse = compare_with_oracle(s, 100, 10.0);
  const auto fine = compare_with_oracle(s, 400, 10.0);
  CHECK(coarse.l1_rho + coarse.l1_v >= 1.8 * (fine.l1_rho + fine.l1_v));
  CHECK(fine.l1_v < 0.05);
}
