#include "sigflow/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <sstream>

#include "sigflow/error.hpp"
#include "sigflow/hyperbolic.hpp"
#include "sigflow/parabolic.hpp"

namespace sigflow {

const char* to_string(SolverKind k) {
  return k == SolverKind::Hyperbolic ? "hyperbolic" : "viscous";
}

const char* to_string(Model m) { return m == Model::First ? "first" : "second"; }

FaceSnap snap_to_face(const RoadGrid& grid, double x) {
  const int face = std::clamp(static_cast<int>(std::lround((x - grid.x_min) / grid.dx())), 0,
                              grid.n_cells);
  const double pos = grid.face(face);
  return {x, pos, face, pos - x};
}

namespace {

struct Geometry {
  FaceSnap split;
  FaceSnap stop;
};

Geometry geometry(const Scenario& s) {
  return {snap_to_face(s.grid, s.timing.x0 - s.timing.h), snap_to_face(s.grid, s.timing.x0)};
}

FlowState slice(const FlowState& s, int first, int count) {
  const double dx = s.grid.dx();
  RoadGrid g{s.grid.x_min + first * dx, s.grid.x_min + (first + count) * dx, count};
  if (first + count == s.grid.n_cells) g.x_max = s.grid.x_max;
  if (first == 0) g.x_min = s.grid.x_min;
  return FlowState{g,
                   {s.rho.begin() + first, s.rho.begin() + first + count},
                   {s.v.begin() + first, s.v.begin() + first + count},
                   s.t};
}

// Braking profile carried onto the snapped faces.
BrakingProfile snapped_braking(const BrakingProfile& b, const SignalTiming& tm, const Geometry& g) {
  if (g.split.shift == 0.0 && g.stop.shift == 0.0) return b;
  const double from_lo = tm.x0 - tm.h, from_hi = tm.x0;
  const double to_lo = g.split.position, to_hi = g.stop.position;
  Profile gamma = b.gamma;
  BrakingProfile out = b;
  out.gamma = Profile::custom(
      [=](double t) {
        return to_lo + (gamma(t) - from_lo) * (to_hi - to_lo) / (from_hi - from_lo);
      },
      "snapped gamma");
  return out;
}

template <class Fn>
PhaseRun timed(const Phase& phase, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  PhaseRun r{phase, fn(), 0.0};
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Trajectory run_hyperbolic(const Scenario& s, const FlowState& initial, bool inflow, double t_end) {
  hyperbolic::Problem p;
  p.initial = initial;
  if (inflow)
    p.boundary.left = hyperbolic::Inflow{s.inflow};
  else
    p.boundary.left = hyperbolic::Vacuum{};
  p.boundary.right = hyperbolic::Outflow{};
  p.force = s.force;
  p.t_end = t_end;
  p.snapshot_interval = s.numerics.snapshot_interval;
  p.cfl = s.numerics.cfl;
  return hyperbolic::solve(p);
}

Trajectory run_viscous_fixed(const Scenario& s, const FlowState& initial, bool inflow,
                             double t_end) {
  parabolic::Problem p;
  p.initial = initial;
  p.domain = parabolic::MovingDomain::fixed(initial.grid.x_min, initial.grid.x_max,
                                            initial.grid.n_cells);
  if (inflow) {
    p.boundary.left_v = s.inflow.v_in;
    p.boundary.left_rho = s.inflow.rho_in;
  } else {
    p.boundary.left_v = Profile::constant(0.0);
    p.boundary.left_rho = Profile::constant(0.0);
  }
  p.mu = s.mu;
  p.force = s.force;
  p.t_end = t_end;
  p.snapshot_interval = s.numerics.snapshot_interval;
  p.dt = s.numerics.parabolic_dt;
  return parabolic::solve(p);
}

double face_velocity(const FlowState& s, int face) {
  if (face <= 0) return s.v.front();
  if (face >= s.grid.n_cells) return s.v.back();
  return 0.5 * (s.v[face - 1] + s.v[face]);
}

SimulationRun run_cycle(const Scenario& s, Model model) {
  {
    const auto violations = validate_scenario(s);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "scenario is invalid:";
      for (const auto& v : violations) os << "\n  " << v.field << ": " << v.message;
      throw InvariantError(violations.front().field, os.str());
    }
  }
  Scenario sc = s;
  sc.model = model;
  const Geometry geo = geometry(sc);
  const auto& tm = sc.timing;
  const double t_brake = tm.braking_start();
  const double t_green = tm.green_time();

  SimulationRun run;
  run.model = model;
  run.plan = build_phase_plan(sc);
  run.split = geo.split;
  run.stop = geo.stop;
  const auto& plan = run.plan.phases;
  const bool first = model == Model::First;

  auto fail = [&](const std::string& phase, const std::exception& e) {
    run.failed_phase = phase;
    run.error = e.what();
  };

  // free flow up to the braking start
  FlowState handoff;
  try {
    const FlowState initial = FlowState::sample(sc.grid, sc.rho0, sc.v0, 0.0);
    run.phases.push_back(timed(plan[0], [&] {
      return first ? run_hyperbolic(sc, initial, true, t_brake)
                   : run_viscous_fixed(sc, initial, true, t_brake);
    }));
    handoff = run.phases.back().trajectory.final_state();
  } catch (const std::exception& e) {
    fail(plan[0].name, e);
    return run;
  }

  run.handoff_velocity = face_velocity(handoff, geo.split.face);
  run.handoff_velocity_stop_line = face_velocity(handoff, geo.stop.face);
  SignalTiming snapped = tm;
  snapped.x0 = geo.stop.position;
  snapped.h = geo.stop.position - geo.split.position;
  const BrakingProfile braking = sc.braking ? snapped_braking(*sc.braking, tm, {geo.split, geo.stop})
                                            : default_braking_profile(snapped, run.handoff_velocity);
  const double v_start = braking.speed(t_brake);
  run.compatibility_residual = std::abs(v_start - run.handoff_velocity);
  run.compatibility_residual_stop_line = std::abs(v_start - run.handoff_velocity_stop_line);

  SplitResult parts;
  try {
    parts = split_at(handoff, tm.x0 - tm.h);
    if (*run.compatibility_residual > kCompatibilityTolerance) {
      std::ostringstream os;
      os << "braking speed V(t0 - tau0) = " << v_start
         << " does not match the free-flow velocity " << run.handoff_velocity
         << " at the braking-zone start (tolerance " << kCompatibilityTolerance << " m/s)";
      throw Error(os.str());
    }
  } catch (const std::exception& e) {
    fail(plan[1].name, e);
    return run;
  }

  // red phase: upstream flow against the braking boundary, downstream flow drains
  auto upstream = [&] {
    return timed(plan[1], [&] {
      parabolic::Problem p;
      p.initial = parts.upstream;
      p.domain = {sc.grid.x_min, braking.gamma, parts.upstream.grid.n_cells};
      p.boundary.left_v = sc.inflow.v_in;
      p.boundary.left_rho = sc.inflow.rho_in;
      p.boundary.right_v = braking.speed;
      p.mu = sc.mu;
      if (sc.braking_phase_force) p.force = sc.force;
      p.t_end = t_green;
      p.snapshot_interval = sc.numerics.snapshot_interval;
      p.dt = sc.numerics.parabolic_dt;
      p.output_dx = sc.grid.dx();
      p.handoff_velocity = run.handoff_velocity;
      return parabolic::solve(p);
    });
  };
  auto downstream = [&] {
    return timed(plan[2], [&] {
      return first ? run_hyperbolic(sc, parts.downstream, false, t_green)
                   : run_viscous_fixed(sc, parts.downstream, false, t_green);
    });
  };
  auto up_future = std::async(std::launch::async, upstream);
  auto down_future = std::async(std::launch::async, downstream);
  std::optional<PhaseRun> up_run, down_run;
  std::string up_error, down_error;
  try {
    up_run = up_future.get();
  } catch (const std::exception& e) {
    up_error = e.what();
  }
  try {
    down_run = down_future.get();
  } catch (const std::exception& e) {
    down_error = e.what();
  }
  if (up_run) run.phases.push_back(std::move(*up_run));
  if (down_run) run.phases.push_back(std::move(*down_run));
  if (!up_error.empty() || !down_error.empty()) {
    run.failed_phase = !up_error.empty() ? plan[1].name : plan[2].name;
    run.error = !up_error.empty() ? up_error : down_error;
    return run;
  }

  // green light: merge and resume
  try {
    const FlowState& up_final = run.phases[1].trajectory.final_state();
    const FlowState& down_final = run.phases[2].trajectory.final_state();
    run.merged = merge(up_final, down_final, geo.stop.position, t_green, sc.grid);
    run.merge_adjustment =
        run.merged->total_mass() - (up_final.total_mass() + down_final.total_mass());
  } catch (const std::exception& e) {
    fail("merge", e);
    return run;
  }
  if (plan.size() > 3) {
    try {
      run.phases.push_back(timed(plan[3], [&] {
        return first ? run_hyperbolic(sc, *run.merged, true, sc.t_end)
                     : run_viscous_fixed(sc, *run.merged, true, sc.t_end);
      }));
    } catch (const std::exception& e) {
      fail(plan[3].name, e);
    }
  }
  return run;
}

}  // namespace

PhasePlan build_phase_plan(const Scenario& s) {
  const Geometry geo = geometry(s);
  const auto& tm = s.timing;
  const bool first = s.model == Model::First;
  const SolverKind free_solver = first ? SolverKind::Hyperbolic : SolverKind::Viscous;
  const bool force = s.force.has_value();
  PhasePlan plan;
  plan.phases.push_back({"free_flow", 0.0, tm.braking_start(), free_solver, s.grid.x_min,
                         s.grid.x_max, s.grid.x_max, "inflow", "outflow", force});
  plan.phases.push_back({"upstream", tm.braking_start(), tm.green_time(), SolverKind::Viscous,
                         s.grid.x_min, geo.split.position, geo.stop.position, "inflow",
                         "braking boundary", force && s.braking_phase_force});
  plan.phases.push_back({"downstream", tm.braking_start(), tm.green_time(), free_solver,
                         geo.split.position, s.grid.x_max, s.grid.x_max, "vacuum", "outflow",
                         force});
  if (s.t_end > tm.green_time())
    plan.phases.push_back({"resume", tm.green_time(), s.t_end, free_solver, s.grid.x_min,
                           s.grid.x_max, s.grid.x_max, "inflow", "outflow", force});
  return plan;
}

SplitResult split_at(const FlowState& state, double x_split) {
  const auto& g = state.grid;
  if (!(x_split > g.x_min && x_split < g.x_max))
    throw InvariantError("x_split", "split point must lie strictly inside the grid");
  const FaceSnap snap = snap_to_face(g, x_split);
  if (snap.face < 4 || g.n_cells - snap.face < 4)
    throw InvariantError("x_split", "each side of the split needs at least 4 cells");
  return {slice(state, 0, snap.face), slice(state, snap.face, g.n_cells - snap.face), snap};
}

FlowState merge(const FlowState& upstream, const FlowState& downstream, double x_stop,
                double t_merge, const RoadGrid& full) {
  if (std::abs(upstream.t - t_merge) > 1e-12 || std::abs(downstream.t - t_merge) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "merge time mismatch: upstream t=" << upstream.t << ", downstream t=" << downstream.t
       << ", expected " << t_merge;
    throw InvariantError("t_merge", os.str());
  }
  const double dx = full.dx();
  const double tol = 1e-9 * dx;
  auto aligned = [&](const FlowState& part) {
    const double offset = (part.grid.x_min - full.x_min) / dx;
    return std::abs(part.grid.dx() - dx) <= tol && std::abs(offset - std::round(offset)) <= 1e-9;
  };
  if (!aligned(upstream) || !aligned(downstream))
    throw InvariantError("merge", "both flows must sit on cells of the full grid");
  const int up_first = static_cast<int>(std::lround((upstream.grid.x_min - full.x_min) / dx));
  const int down_first = static_cast<int>(std::lround((downstream.grid.x_min - full.x_min) / dx));
  const int stop_face = static_cast<int>(std::lround((x_stop - full.x_min) / dx));

  std::vector<double> rho(full.n_cells), v(full.n_cells);
  for (int i = 0; i < full.n_cells; ++i) {
    const bool from_up = i < stop_face;
    const FlowState& src = from_up ? upstream : downstream;
    const int j = i - (from_up ? up_first : down_first);
    if (j < 0 || j >= src.grid.n_cells) {
      std::ostringstream os;
      os << "cell " << i << " of the merged road is not covered by the "
         << (from_up ? "upstream" : "downstream") << " flow";
      throw InvariantError("merge", os.str());
    }
    rho[i] = src.rho[j];
    v[i] = src.v[j];
  }
  return FlowState::make(full, std::move(rho), std::move(v), t_merge);
}

const PhaseRun* SimulationRun::find(const std::string& name) const {
  for (const auto& p : phases)
    if (p.phase.name == name) return &p;
  return nullptr;
}

SimulationRun run_first_model(const Scenario& s) { return run_cycle(s, Model::First); }

SimulationRun run_second_model(const Scenario& s) { return run_cycle(s, Model::Second); }

SimulationRun run_model(const Scenario& s) {
  return s.model == Model::First ? run_first_model(s) : run_second_model(s);
}

MassBalanceReport mass_balance_report(const SimulationRun& run) {
  MassBalanceReport rep;
  double largest = 0.0;
  for (const auto& pr : run.phases) {
    const auto& traj = pr.trajectory;
    PhaseBalance b;
    b.name = pr.phase.name;
    b.initial = traj.initial_mass;
    const auto& last = traj.final().ledger;
    b.final = traj.final_state().total_mass();
    b.inflow = last.inflow;
    b.outflow = last.outflow;
    b.clamped = last.clamped;
    for (const auto& snap : traj.snapshots) {
      const double r = snap.state.total_mass() - (traj.initial_mass + snap.ledger.inflow -
                                                 snap.ledger.outflow + snap.ledger.clamped);
      if (std::abs(r) > std::abs(b.residual)) b.residual = r;
      largest = std::max(largest, snap.state.total_mass());
    }
    rep.phases.push_back(b);
  }
  if (rep.phases.empty()) return rep;

  rep.initial = rep.phases.front().initial;
  rep.merge_adjustment = run.merge_adjustment;
  for (const auto& b : rep.phases) {
    rep.clamped += b.clamped;
    if (b.name == "upstream") {
      rep.inflow += b.inflow;
      rep.internal_transfer -= b.outflow;
    } else if (b.name == "downstream") {
      rep.internal_transfer += b.inflow;
      rep.outflow += b.outflow;
    } else {
      rep.inflow += b.inflow;
      rep.outflow += b.outflow;
    }
  }
  const PhaseBalance* up = nullptr;
  const PhaseBalance* down = nullptr;
  const PhaseBalance* resume = nullptr;
  for (const auto& b : rep.phases) {
    if (b.name == "upstream") up = &b;
    if (b.name == "downstream") down = &b;
    if (b.name == "resume") resume = &b;
  }
  if (resume)
    rep.final = resume->final;
  else if (run.merged)
    rep.final = run.merged->total_mass();
  else if (up && down)
    rep.final = up->final + down->final;
  else
    rep.final = rep.phases.back().final;
  if (!run.merged) rep.merge_adjustment = 0.0;

  const bool complete_cycle = (up == nullptr) == (down == nullptr);
  if (complete_cycle) {
    rep.residual = rep.final - (rep.initial + rep.inflow - rep.outflow + rep.internal_transfer +
                                rep.clamped + rep.merge_adjustment);
  } else {
    // a red-phase flow is missing; only per-phase closure is meaningful
    double worst = 0.0;
    for (const auto& b : rep.phases) worst = std::max(worst, std::abs(b.residual));
    rep.residual = worst;
  }
  rep.relative_residual = std::abs(rep.residual) / std::max(largest, 1e-300);
  return rep;
}

}  // namespace sigflow
