// Acceptance checks for the signalised-junction simulator. Prints one
// PASS/FAIL line per criterion and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sigflow/hyperbolic.hpp"
#include "sigflow/lagrangian.hpp"
#include "sigflow/orchestrator.hpp"
#include "sigflow/parabolic.hpp"
#include "sigflow/verification.hpp"
#include "support.hpp"

using namespace sigflow;
namespace hy = sigflow::hyperbolic;
namespace pa = sigflow::parabolic;
namespace lg = sigflow::lagrangian;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;
  std::function<Outcome()> check;
  std::function<void()> setup = {};  // fixture work, timed separately
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario smooth_free_flow() {
  auto s = testing::reference_scenario();
  s.rho0 = Profile::sine(0.1, 0.02, 200.0);
  s.v0 = Profile::constant(10.0);
  s.inflow = BoundaryData{Profile::constant(0.1), Profile::constant(10.0)};
  s.force.reset();
  return s;
}

Outcome oracle_equivalence() {
  const auto s = smooth_free_flow();
  const double horizon = 20.0;
  const auto t_star = lg::estimate_breakdown_time(FlowState::sample(s.grid, s.rho0, s.v0), s.force);
  const auto coarse = compare_with_oracle(s, 200, horizon);
  const auto fine = compare_with_oracle(s, 800, horizon);
  const double ratio = (coarse.l1_rho + coarse.l1_v) / (fine.l1_rho + fine.l1_v);
  const bool ok = ratio >= 1.8 && fine.l1_v < 0.05 && horizon < lg::kBreakdownSafety * t_star;
  return {ok, fmt("L1(200)=%.3e L1(800)=%.3e ratio=%.2f L1v(800)=%.2e", coarse.l1_rho + coarse.l1_v,
                  fine.l1_rho + fine.l1_v, ratio, fine.l1_v)};
}

Outcome uniform_acceleration() {
  const RoadGrid g{0.0, 1000.0, 100};
  const auto initial = FlowState::sample(g, Profile::constant(0.1), Profile::constant(5.0));
  const BoundaryData in{Profile::constant(0.1), Profile::linear(5.0, 1.5)};
  const ForceLaw law{1.5, 16.0, 4.0};

  const auto a = hy::solve({initial, {hy::Inflow{in}, hy::Outflow{}}, law, 2.0, 1.0, 0.5}).final_state();

  pa::Problem p;
  p.initial = initial;
  p.domain = pa::MovingDomain::fixed(0.0, 1000.0, 100);
  p.boundary = {in.v_in, in.rho_in, std::nullopt};
  p.mu = 5.0;
  p.force = law;
  p.t_end = 2.0;
  p.dt = 1e-3;
  const auto b = pa::solve(p).final_state();

  const auto c = lg::solve_oracle(initial, in, law, 2.0, 200, g);

  double worst = 0.0;
  for (const auto* st : {&a, &b, &c})
    for (double v : st->v) worst = std::max(worst, std::abs(v - 8.0));
  return {worst <= 1e-8, fmt("max |v - 8| over both solvers and the oracle = %.2e", worst)};
}

double worst_snapshot_closure(const SimulationRun& run) {
  double worst = 0.0;
  for (const auto& pr : run.phases) {
    const auto& tr = pr.trajectory;
    for (const auto& snap : tr.snapshots) {
      const double scale = std::max({snap.ledger.total, tr.initial_mass, 1e-300});
      worst = std::max(worst, std::abs(snap.ledger.residual(tr.initial_mass)) / scale);
      worst = std::max(worst, std::abs(snap.ledger.total - snap.state.total_mass()) / scale);
    }
  }
  return worst;
}

std::vector<Scenario> standard_suite() {
  std::vector<Scenario> suite;
  for (Model m : {Model::First, Model::Second}) {
    suite.push_back(testing::reference_scenario(m));

    auto off_face = testing::reference_scenario(m);
    off_face.timing.x0 = 603.0;
    off_face.timing.h = 51.0;
    off_face.rho0 = Profile::plateau(0.03, 0.12, 200.0, 450.0, 40.0);
    off_face.v0 = Profile::plateau(12.0, 6.0, 200.0, 450.0, 40.0);
    suite.push_back(off_face);

    auto no_force = testing::reference_scenario(m);
    no_force.force.reset();
    no_force.inflow = BoundaryData{Profile::sine(0.06, 0.02, 30.0), Profile::constant(9.0)};
    suite.push_back(no_force);

    auto braking_force = testing::reference_scenario(m);
    braking_force.braking_phase_force = true;
    braking_force.mu = 1.0;
    suite.push_back(braking_force);
  }
  return suite;
}

Outcome mass_conservation() {
  double worst_global = 0.0, worst_ledger = 0.0;
  int runs = 0;
  std::string failures;
  for (const auto& s : standard_suite()) {
    const auto run = run_model(s);
    ++runs;
    if (!run.ok()) {
      failures += " run " + std::to_string(runs) + " failed in " + run.failed_phase + ";";
      continue;
    }
    worst_global = std::max(worst_global, mass_balance_report(run).relative_residual);
    worst_ledger = std::max(worst_ledger, worst_snapshot_closure(run));
  }
  const bool ok = failures.empty() && worst_global <= 1e-9 && worst_ledger <= 1e-9;
  return {ok, fmt("%d runs, worst global closure %.2e, worst snapshot ledger %.2e", runs,
                  worst_global, worst_ledger) + failures};
}

Outcome stop_guarantee() {
  bool ok = true;
  std::string detail;
  for (Model m : {Model::First, Model::Second}) {
    const auto s = testing::reference_scenario(m);
    const auto run = run_model(s);
    if (!run.ok()) return {false, std::string(to_string(m)) + " model failed: " + run.error};
    int checked = 0;
    double worst_v = 0.0;
    for (const auto& snap : run.find("upstream")->trajectory.snapshots) {
      const double t = snap.state.t;
      if (t < s.timing.t0 || t > s.timing.green_time()) continue;
      ++checked;
      worst_v = std::max(worst_v, std::abs(snap.nodes->right_v));
    }
    const double compat = run.compatibility_residual.value_or(INFINITY);
    ok = ok && checked >= s.timing.tau1 && worst_v == 0.0 && compat < 1e-6;
    detail += fmt("%s: %d snapshots, max |v| at light %.1e, compatibility %.1e; ", to_string(m),
                  checked, worst_v, compat);
  }
  return {ok, detail};
}

Outcome vacuum_boundary() {
  const auto run = run_first_model(testing::reference_scenario());
  const PhaseRun* down = run.find("downstream");
  if (!down) return {false, "downstream run missing: " + run.error};
  double worst_increase = -INFINITY, inflow = 0.0;
  const auto& snaps = down->trajectory.snapshots;
  for (std::size_t k = 1; k < snaps.size(); ++k)
    worst_increase = std::max(worst_increase, snaps[k].state.total_mass() - snaps[k - 1].state.total_mass());
  inflow = snaps.back().ledger.inflow;
  return {worst_increase <= 1e-12 && inflow == 0.0,
          fmt("%zu snapshots, largest mass change %.2e, boundary inflow %.1e", snaps.size(),
              worst_increase, inflow)};
}

Outcome maximum_principle() {
  std::mt19937_64 rng(20240601);
  double worst = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 60;
    const double L = testing::uniform(rng, 100.0, 600.0);
    const pa::MovingDomain d = pa::MovingDomain::fixed(0.0, L, n);
    const auto rho = Profile::sine(0.1, testing::uniform(rng, 0.0, 0.08), testing::uniform(rng, 0.2, 1.0) * L,
                                   testing::uniform(rng, 0.0, 6.3));
    const auto v0 = Profile::sine(testing::uniform(rng, 4.0, 12.0), testing::uniform(rng, 0.0, 4.0),
                                  testing::uniform(rng, 0.2, 1.0) * L, testing::uniform(rng, 0.0, 6.3));
    auto u = pa::rescale_to_unit(FlowState::sample(RoadGrid{0.0, L, n}, rho, v0), d, 0.0);
    const pa::Boundary b{Profile::sine(v0(0.0), testing::uniform(rng, 0.0, 3.0), testing::uniform(rng, 5.0, 40.0)),
                         Profile::constant(0.1),
                         Profile::sine(v0(L), testing::uniform(rng, 0.0, 3.0), testing::uniform(rng, 5.0, 40.0))};
    u.v.front() = b.left_v(0.0);
    u.v.back() = (*b.right_v)(0.0);
    double hi = *std::max_element(u.v.begin(), u.v.end());
    double lo = *std::min_element(u.v.begin(), u.v.end());
    const double dt = 0.02;
    const pa::StepOptions opts{testing::uniform(rng, 0.5, 20.0), std::nullopt, dt};
    for (int k = 0; k < 500; ++k) {
      const double t1 = (k + 1) * dt;
      hi = std::max({hi, b.left_v(t1), (*b.right_v)(t1)});
      lo = std::min({lo, b.left_v(t1), (*b.right_v)(t1)});
      u = pa::step_viscous(u, dt, opts, b, d).state;
      for (int j = 1; j < n; ++j) worst = std::max({worst, u.v[j] - hi, lo - u.v[j]});
    }
  }
  return {worst <= 1e-8, fmt("20 trials x 500 steps, largest excursion beyond the data bounds %.2e", worst)};
}

Outcome transform_round_trip() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double x_min = testing::uniform(rng, -100.0, 100.0);
    const RoadGrid g{x_min, x_min + testing::uniform(rng, 50.0, 2000.0), 50 + trial * 7};
    Profile rho;
    switch (trial % 4) {
      case 0: rho = Profile::sine(0.1, testing::uniform(rng, 0.0, 0.095), testing::uniform(rng, 10.0, 500.0)); break;
      case 1: rho = Profile::plateau(testing::uniform(rng, 0.01, 0.05), testing::uniform(rng, 0.05, 0.3),
                                     g.x_min + 0.2 * g.length(), g.x_min + 0.6 * g.length(), 0.1 * g.length());
              break;
      case 2: rho = Profile::linear(testing::uniform(rng, 0.05, 0.2) - 0.0 * x_min, 0.0); break;
      default: {
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k <= 8; ++k)
          pts.emplace_back(g.x_min + g.length() * k / 8.0, testing::uniform(rng, 0.005, 0.25));
        rho = Profile::table(pts);
      }
    }
    const auto v = Profile::sine(10.0, testing::uniform(rng, 0.0, 9.0), testing::uniform(rng, 10.0, 500.0));
    const auto s = FlowState::sample(g, rho, v);
    const auto back = lg::reconstruct_physical(lg::to_mass_coordinates(s), g);
    for (int i = 0; i < g.n_cells; ++i) {
      worst = std::max(worst, std::abs(back.rho[i] - s.rho[i]) / s.rho[i]);
      worst = std::max(worst, std::abs(back.v[i] - s.v[i]) / std::max(std::abs(s.v[i]), 1e-300));
    }
  }
  return {worst <= 1e-8, fmt("50 profiles, worst relative deviation %.2e", worst)};
}

std::vector<SimulationRun> merge_fixtures;

void prepare_merge_fixtures() {
  for (Model m : {Model::First, Model::Second})
    merge_fixtures.push_back(run_model(testing::reference_scenario(m)));
}

Outcome merge_correctness() {
  int compared = 0, mismatches = 0;
  for (const auto& run : merge_fixtures) {
    if (!run.ok() || !run.merged) return {false, "run failed: " + run.error};
    const auto& up = run.find("upstream")->trajectory.final_state();
    const auto& down = run.find("downstream")->trajectory.final_state();
    const auto& full = *run.merged;
    const double dx = full.grid.dx();
    const int down_first = static_cast<int>(std::lround((down.grid.x_min - full.grid.x_min) / dx));
    for (int i = 0; i < full.grid.n_cells; ++i) {
      const bool left = full.grid.center(i) < run.stop.position;
      const double r = left ? up.rho[i] : down.rho[i - down_first];
      const double v = left ? up.v[i] : down.v[i - down_first];
      ++compared;
      if (full.rho[i] != r || full.v[i] != v) ++mismatches;
    }
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RoadGrid g{0.0, 500.0, 100};
    const auto s = FlowState::sample(g, Profile::sine(0.1, testing::uniform(rng, 0, 0.09), 80.0),
                                     Profile::sine(8.0, testing::uniform(rng, 0, 7), 130.0), 3.0);
    const auto parts = split_at(s, testing::uniform(rng, 30.0, 470.0));
    const auto back = merge(parts.upstream, parts.downstream, parts.snap.position, 3.0, g);
    compared += g.n_cells;
    for (int i = 0; i < g.n_cells; ++i)
      if (back.rho[i] != s.rho[i] || back.v[i] != s.v[i]) ++mismatches;
  }
  return {mismatches == 0, fmt("%d cells compared bit for bit, %d mismatches", compared, mismatches)};
}

Outcome stationarity() {
  const RoadGrid g{0.0, 1000.0, 200};
  const auto s = FlowState::sample(g, Profile::sine(0.1, 0.06, 170.0), Profile::constant(0.0));
  const auto a = hy::solve({s, {hy::Vacuum{}, hy::Outflow{}}, std::nullopt, 10.0, 1.0, 0.5});

  pa::Problem p;
  p.initial = s;
  p.domain = pa::MovingDomain::fixed(0.0, 1000.0, 200);
  p.boundary = {Profile::constant(0.0), Profile::constant(0.0), Profile::constant(0.0)};
  p.mu = 5.0;
  p.t_end = 10.0;
  p.dt = 1e-3;
  const auto b = pa::solve(p);

  double worst = 0.0;
  for (const auto* tr : {&a, &b})
    for (const auto& snap : tr->snapshots)
      for (int i = 0; i < g.n_cells; ++i)
        worst = std::max({worst, std::abs(snap.state.rho[i] - s.rho[i]), std::abs(snap.state.v[i])});
  return {worst <= 1e-15,
          fmt("free-flow solvers of both models, t_end = 10 s, largest change %.1e", worst)};
}

Outcome time_convergence() {
  auto s = testing::reference_scenario();
  std::vector<FlowState> finals;
  for (double dt : {0.01, 0.005, 0.0025}) {
    s.numerics.parabolic_dt = dt;
    const auto run = run_first_model(s);
    const PhaseRun* up = run.find("upstream");
    if (!up) return {false, "braking run failed: " + run.error};
    finals.push_back(up->trajectory.final_state());
  }
  auto change = [&](int i) {
    const auto& a = finals[i];
    const auto& b = finals[i + 1];
    return l1_error(a.rho, b.rho, a.grid) + l1_error(a.v, b.v, a.grid);
  };
  const double d1 = change(0), d2 = change(1);
  return {d1 >= 1.8 * d2, fmt("changes %.3e -> %.3e, ratio %.2f", d1, d2, d1 / d2)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 10.0, oracle_equivalence},
      {2, "uniform acceleration", 1.0, uniform_acceleration},
      {3, "mass conservation", 30.0, mass_conservation},
      {4, "stop guarantee", 20.0, stop_guarantee},
      {5, "vacuum boundary", 5.0, vacuum_boundary},
      {6, "parabolic maximum principle", 10.0, maximum_principle},
      {7, "transform round trip", 2.0, transform_round_trip},
      {8, "merge correctness", 1.0, merge_correctness, prepare_merge_fixtures},
      {9, "stationarity", 2.0, stationarity},
      {10, "parabolic time convergence", 15.0, time_convergence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    std::string setup_note;
    auto start = std::chrono::steady_clock::now();
    try {
      if (c.setup) {
        c.setup();
        const auto now = std::chrono::steady_clock::now();
        setup_note = fmt("  (fixture runs %.2f s)", std::chrono::duration<double>(now - start).count());
        start = now;
      }
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s  [%2d] %-28s %6.2f s (limit %g s)  %s%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                secs, c.time_limit, out.detail.c_str(), setup_note.c_str(),
                in_time ? "" : "  [over time limit]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
