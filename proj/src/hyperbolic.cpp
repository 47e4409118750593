#include "sigflow/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sigflow/error.hpp"

namespace sigflow::hyperbolic {

namespace {

Primitive primitive(double m, double q) {
  if (m < kVacuumDensity) return {m, 0.0};
  return {m, q / m};
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Primitive left_ghost(const Boundary& b, double t) {
  return std::visit(overloaded{[t](const Inflow& in) {
                                 return Primitive{in.data.rho_in(t), in.data.v_in(t)};
                               },
                               [](const Vacuum&) { return Primitive{}; }},
                    b.left);
}

Primitive right_ghost(const Boundary& b, Primitive last) {
  return std::visit(overloaded{[last](const Outflow&) { return last; },
                               [](const Vacuum&) { return Primitive{}; }},
                    b.right);
}

double max_speed(const FlowState& s) {
  double vmax = 0.0;
  for (double v : s.v) vmax = std::max(vmax, std::abs(v));
  return vmax;
}

}  // namespace

ConservedState to_conserved(const FlowState& s) {
  ConservedState c{s.grid, s.rho, std::vector<double>(s.rho.size()), s.t};
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    c.q[i] = s.rho[i] < kVacuumDensity ? 0.0 : s.rho[i] * s.v[i];
  return c;
}

FlowState to_flow(const ConservedState& s) {
  std::vector<double> v(s.m.size());
  for (std::size_t i = 0; i < s.m.size(); ++i) v[i] = primitive(s.m[i], s.q[i]).v;
  return FlowState::make(s.grid, s.m, std::move(v), s.t);
}

Flux numerical_flux(Primitive left, Primitive right) {
  const double s = std::max(std::abs(left.v), std::abs(right.v));
  const double ql = left.rho * left.v;
  const double qr = right.rho * right.v;
  return {0.5 * (ql + qr) - 0.5 * s * (right.rho - left.rho),
          0.5 * (ql * left.v + qr * right.v) - 0.5 * s * (qr - ql)};
}

double cfl_dt(const FlowState& state, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvariantError("cfl", "cfl must lie in (0, 1]");
  return cfl * state.grid.dx() / std::max(max_speed(state), kSpeedFloor);
}

StepResult step(const ConservedState& state, double dt, const Boundary& boundary,
                const ForceOption& force) {
  const int n = state.grid.n_cells;
  const double dx = state.grid.dx();
  if (!(dt > 0.0)) throw InvariantError("dt", "time step must be > 0");

  // cells 1..n with ghosts at 0 and n+1
  std::vector<Primitive> w(n + 2);
  for (int i = 0; i < n; ++i) w[i + 1] = primitive(state.m[i], state.q[i]);
  w[0] = left_ghost(boundary, state.t);
  w[n + 1] = right_ghost(boundary, w[n]);

  double smax = 0.0;
  for (const auto& p : w) smax = std::max(smax, std::abs(p.v));
  if (dt * smax > kCflSlack * dx) {
    std::ostringstream os;
    os << "hyperbolic step dt=" << dt << " exceeds stability limit dx/max|v| = " << dx / smax;
    throw CflError(os.str());
  }

  std::vector<Flux> f(n + 1);
  for (int j = 0; j <= n; ++j) f[j] = numerical_flux(w[j], w[j + 1]);

  StepResult out{state, dt * f[0].mass, dt * f[n].mass, 0.0};
  auto& next = out.state;
  const double lambda = dt / dx;
  for (int i = 0; i < n; ++i) {
    next.m[i] = state.m[i] - lambda * (f[i + 1].mass - f[i].mass);
    next.q[i] = state.q[i] - lambda * (f[i + 1].momentum - f[i].momentum);
    if (next.m[i] < 0.0) {
      out.clamped += -next.m[i] * dx;
      next.m[i] = 0.0;
    }
    if (next.m[i] < kVacuumDensity || next.q[i] < 0.0) next.q[i] = 0.0;
  }

  // source update on the transported state
  if (force) {
    for (int i = 0; i < n; ++i) {
      if (next.m[i] < kVacuumDensity) continue;
      const double v = next.q[i] / next.m[i];
      next.q[i] += dt * next.m[i] * (*force)(v);
    }
  }
  next.t = state.t + dt;
  return out;
}

Trajectory solve(const Problem& problem) {
  const double t_start = problem.initial.t;
  if (problem.t_end < t_start) throw InvariantError("t_end", "t_end precedes the initial time");
  if (!(problem.snapshot_interval > 0.0))
    throw InvariantError("snapshot_interval", "must be > 0");

  const double dx = problem.initial.grid.dx();
  Trajectory traj;
  traj.initial_mass = problem.initial.total_mass();
  MassLedger ledger{traj.initial_mass, 0.0, 0.0, 0.0};
  traj.snapshots.push_back({problem.initial, ledger, std::nullopt});

  ConservedState cur = to_conserved(problem.initial);
  FlowState prim = problem.initial;
  int k = 1;
  const double eps = 1e-12 * std::max(1.0, std::abs(problem.t_end));
  while (cur.t < problem.t_end) {
    const double target = std::min(problem.t_end, t_start + k * problem.snapshot_interval);
    double speed = 0.0;
    if (const auto* in = std::get_if<Inflow>(&problem.boundary.left))
      speed = std::abs(in->data.v_in(cur.t));
    for (double v : prim.v) speed = std::max(speed, std::abs(v));
    double dt = problem.cfl * dx / std::max(speed, kSpeedFloor);
    const bool lands = cur.t + dt >= target - eps;
    if (lands) dt = target - cur.t;

    StepResult r = step(cur, dt, problem.boundary, problem.force);
    ++traj.steps;
    cur = std::move(r.state);
    if (lands) cur.t = target;
    ledger.inflow += r.mass_in;
    ledger.outflow += r.mass_out;
    ledger.clamped += r.clamped;
    prim = to_flow(cur);
    if (lands) {
      ledger.total = prim.total_mass();
      traj.snapshots.push_back({prim, ledger, std::nullopt});
      if (target < problem.t_end) ++k;
    }
  }
  return traj;
}

}  // namespace sigflow::hyperbolic
