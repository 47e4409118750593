#include "sigflow/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sigflow/error.hpp"
#include "tridiagonal.hpp"

namespace sigflow::parabolic {

namespace {

// Piecewise-linear interpolation through (xs, ys), constant beyond the ends.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

bool coincides(const RoadGrid& g, double left, double right, int n) {
  const double tol = 1e-12 * std::max({1.0, std::abs(left), std::abs(right)});
  return g.n_cells == n && std::abs(g.x_min - left) <= tol && std::abs(g.x_max - right) <= tol;
}

BoundaryNodes nodes_of(const UnitState& s, const MovingDomain& d) {
  return {d.left, s.v.front(), d.right_at(s.t), s.v.back()};
}

}  // namespace

MovingDomain MovingDomain::fixed(double left, double right, int n_cells) {
  return {left, Profile::constant(right), n_cells};
}

UnitState rescale_to_unit(const FlowState& state, const MovingDomain& domain, double t) {
  const double right = domain.right_at(t);
  if (!(right > domain.left))
    throw InvariantError("domain.right", "right boundary must lie to the right of the left end");
  const int n = domain.n_cells;
  UnitState out{std::vector<double>(n), std::vector<double>(n + 1), t};

  if (coincides(state.grid, domain.left, right, n)) {
    out.rho = state.rho;
    out.v.front() = state.v.front();
    out.v.back() = state.v.back();
    for (int j = 1; j < n; ++j) out.v[j] = 0.5 * (state.v[j - 1] + state.v[j]);
    return out;
  }

  std::vector<double> xc(state.grid.n_cells);
  for (int i = 0; i < state.grid.n_cells; ++i) xc[i] = state.grid.center(i);
  const double h = (right - domain.left) / n;
  for (int i = 0; i < n; ++i) out.rho[i] = interpolate(xc, state.rho, domain.left + (i + 0.5) * h);
  for (int j = 0; j <= n; ++j) out.v[j] = interpolate(xc, state.v, domain.left + j * h);
  return out;
}

FlowState rescale_from_unit(const UnitState& state, const MovingDomain& domain) {
  const int n = state.n_cells();
  const double right = domain.right_at(state.t);
  if (!(right > domain.left))
    throw InvariantError("domain.right", "right boundary must lie to the right of the left end");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.5 * (state.v[i] + state.v[i + 1]);
  return FlowState::make(RoadGrid{domain.left, right, n}, state.rho, std::move(v), state.t);
}

FlowState remap_to_grid(const UnitState& state, const MovingDomain& domain,
                        const RoadGrid& target) {
  const int n = state.n_cells();
  const double left = domain.left;
  const double h = domain.length(state.t) / n;
  const double ht = target.dx();

  std::vector<double> rho(target.n_cells, 0.0);
  for (int k = 0; k < target.n_cells; ++k) {
    const double a = target.face(k);
    const double b = k + 1 == target.n_cells ? target.x_max : target.face(k + 1);
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
      const double lo = std::max(a, left + s * h);
      const double hi = std::min(b, left + (s + 1) * h);
      if (hi > lo) acc += state.rho[s] * (hi - lo);
    }
    rho[k] = acc / ht;
  }

  std::vector<double> xn(n + 1);
  for (int j = 0; j <= n; ++j) xn[j] = left + j * h;
  std::vector<double> v(target.n_cells);
  for (int k = 0; k < target.n_cells; ++k) v[k] = interpolate(xn, state.v, target.center(k));
  return FlowState::make(target, std::move(rho), std::move(v), state.t);
}

StepResult step_viscous(const UnitState& state, double dt, const StepOptions& options,
                        const Boundary& boundary, const MovingDomain& domain) {
  const int n = state.n_cells();
  if (!(dt > 0.0)) throw InvariantError("dt", "time step must be > 0");
  if (dt > options.dt_cap * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "viscous step dt=" << dt << " exceeds the configured cap " << options.dt_cap;
    throw CflError(os.str());
  }
  if (!(options.mu > 0.0)) throw InvariantError("mu", "viscosity must be > 0");

  const double t0 = state.t;
  const double t1 = t0 + dt;
  const double len0 = domain.length(t0);
  const double len1 = domain.length(t1);
  if (!(len0 > 0.0) || !(len1 > 0.0))
    throw InvariantError("domain.right", "right boundary must lie to the right of the left end");
  const double h0 = len0 / n;
  const double h1 = len1 / n;
  const double growth = (len1 - len0) / dt;
  auto mesh_speed = [&](int j) { return growth * j / n; };

  // velocity: explicit advection relative to the mesh plus force
  std::vector<double> rhs(n + 1);
  double umax = 0.0;
  for (int j = 1; j < n; ++j) {
    const double u = state.v[j] - mesh_speed(j);
    const double grad = u > 0.0 ? (state.v[j] - state.v[j - 1]) / h0
                                : (state.v[j + 1] - state.v[j]) / h0;
    umax = std::max(umax, std::abs(u));
    rhs[j] = state.v[j] - dt * u * grad;
    // no drivers, no acceleration
    if (0.5 * (state.rho[j - 1] + state.rho[j]) > kDensityFloor)
      rhs[j] += dt * evaluate_force(options.force, state.v[j]);
  }
  if (dt * umax > h0) {
    std::ostringstream os;
    os << "viscous step dt=" << dt << " violates the advective CFL bound " << h0 / umax;
    throw CflError(os.str());
  }

  // implicit diffusion with coefficient mu / rho at each node
  const bool dirichlet_right = boundary.right_v.has_value();
  std::vector<double> a(n + 1, 0.0), b(n + 1, 1.0), c(n + 1, 0.0);
  rhs[0] = boundary.left_v(t1);
  for (int j = 1; j < n; ++j) {
    const double rho_node = std::max(0.5 * (state.rho[j - 1] + state.rho[j]), kDensityFloor);
    const double k = dt * options.mu / (rho_node * h1 * h1);
    a[j] = -k;
    b[j] = 1.0 + 2.0 * k;
    c[j] = -k;
  }
  if (dirichlet_right) {
    rhs[n] = (*boundary.right_v)(t1);
  } else {
    // zero gradient: v_n = v_{n-1}, folded into row n-1
    b[n - 1] += c[n - 1];
    c[n - 1] = 0.0;
    a[n] = 0.0;
    rhs[n] = 0.0;
  }
  std::vector<double> v = detail::solve_tridiagonal(a, b, c, rhs);
  if (!dirichlet_right) v[n] = v[n - 1];
  for (int j = 1; j < n; ++j) v[j] = std::max(v[j], 0.0);
  if (!dirichlet_right) v[n] = std::max(v[n], 0.0);

  // density: conservative upwind transport relative to the moving mesh
  std::vector<double> flux(n + 1);
  double wmax = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double u = v[j] - mesh_speed(j);
    wmax = std::max(wmax, std::abs(u));
    double upwind;
    if (j == 0)
      upwind = u > 0.0 ? boundary.left_rho(t1) : state.rho[0];
    else if (j == n)
      upwind = state.rho[n - 1];
    else
      upwind = u > 0.0 ? state.rho[j - 1] : state.rho[j];
    flux[j] = upwind * u;
  }
  if (2.0 * dt * wmax > std::min(h0, h1)) {
    std::ostringstream os;
    os << "viscous step dt=" << dt << " violates the density CFL bound "
       << std::min(h0, h1) / (2.0 * wmax);
    throw CflError(os.str());
  }

  StepResult out{UnitState{std::vector<double>(n), std::move(v), t1}, dt * flux[0], dt * flux[n],
                 0.0};
  for (int i = 0; i < n; ++i) {
    const double m = state.rho[i] * h0 - dt * (flux[i + 1] - flux[i]);
    if (m < 0.0) out.clamped += -m;
    out.state.rho[i] = std::max(m, 0.0) / h1;
  }
  return out;
}

Trajectory solve(const Problem& problem) {
  const double t_start = problem.initial.t;
  if (problem.t_end < t_start) throw InvariantError("t_end", "t_end precedes the initial time");
  if (!(problem.dt > 0.0)) throw InvariantError("parabolic_dt", "must be > 0");
  if (!(problem.snapshot_interval > 0.0))
    throw InvariantError("snapshot_interval", "must be > 0");

  const auto& dom = problem.domain;
  const auto& bnd = problem.boundary;
  UnitState cur = rescale_to_unit(problem.initial, dom, t_start);
  cur.v.front() = bnd.left_v(t_start);
  if (bnd.right_v) cur.v.back() = (*bnd.right_v)(t_start);

  auto output = [&](const UnitState& s) {
    if (problem.output_dx > 0.0) {
      const double len = dom.length(s.t);
      const double cells = len / problem.output_dx;
      const long m = std::lround(cells);
      if (m >= 1 && m != s.n_cells() && std::abs(cells - m) <= 1e-9 * cells)
        return remap_to_grid(s, dom, RoadGrid{dom.left, dom.right_at(s.t), static_cast<int>(m)});
    }
    return rescale_from_unit(s, dom);
  };

  Trajectory traj;
  traj.initial_mass = problem.initial.total_mass();
  if (problem.handoff_velocity && bnd.right_v)
    traj.compatibility_residual = std::abs((*bnd.right_v)(t_start) - *problem.handoff_velocity);
  MassLedger ledger{traj.initial_mass, 0.0, 0.0, 0.0};
  traj.snapshots.push_back({problem.initial, ledger, nodes_of(cur, dom)});

  const StepOptions opts{problem.mu, problem.force, problem.dt};
  int k = 1;
  while (cur.t < problem.t_end) {
    const double target = std::min(problem.t_end, t_start + k * problem.snapshot_interval);
    double dt = problem.dt;
    const bool lands = cur.t + dt >= target - 1e-9 * problem.dt;
    if (lands) dt = target - cur.t;
    StepResult r = step_viscous(cur, dt, opts, bnd, dom);
    ++traj.steps;
    cur = std::move(r.state);
    if (lands) cur.t = target;
    ledger.inflow += r.mass_in;
    ledger.outflow += r.mass_out;
    ledger.clamped += r.clamped;
    if (lands) {
      FlowState s = output(cur);
      ledger.total = s.total_mass();
      traj.snapshots.push_back({std::move(s), ledger, nodes_of(cur, dom)});
      if (target < problem.t_end) ++k;
    }
  }
  return traj;
}

}  // namespace sigflow::parabolic
