#include "sigflow/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sigflow/error.hpp"

namespace sigflow {

namespace {

void add(std::vector<Violation>& out, std::string field, std::string condition,
         std::string message) {
  out.push_back({std::move(field), std::move(condition), std::move(message)});
}

void throw_first(const std::vector<Violation>& v) {
  if (!v.empty()) throw InvariantError(v.front().field, v.front().message);
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Number of whole cells between x_min and the face nearest x.
int nearest_face(const RoadGrid& g, double x) {
  return static_cast<int>(std::lround((x - g.x_min) / g.dx()));
}

}  // namespace

// ---------------------------------------------------------------------------

void check_grid(const RoadGrid& g, std::vector<Violation>& out, const std::string& prefix) {
  if (!std::isfinite(g.x_min) || !std::isfinite(g.x_max) || !(g.x_max > g.x_min))
    add(out, prefix + ".x_max", "grid extent", "x_max must exceed x_min (both finite)");
  if (g.n_cells < 4) add(out, prefix + ".n_cells", "grid resolution", "n_cells must be >= 4");
}

RoadGrid RoadGrid::make(double x_min, double x_max, int n_cells) {
  RoadGrid g{x_min, x_max, n_cells};
  std::vector<Violation> v;
  check_grid(g, v);
  throw_first(v);
  return g;
}

FlowState FlowState::make(RoadGrid grid, std::vector<double> rho, std::vector<double> v,
                          double t) {
  const auto n = static_cast<std::size_t>(grid.n_cells);
  if (rho.size() != n) throw InvariantError("rho", "expected " + std::to_string(n) + " values");
  if (v.size() != n) throw InvariantError("v", "expected " + std::to_string(n) + " values");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(rho[i]) || rho[i] < 0.0)
      throw InvariantError("rho", "density must be finite and >= 0 (cell " + std::to_string(i) +
                                      ", value " + num(rho[i]) + ")");
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw InvariantError("v", "velocity must be finite and >= 0 (cell " + std::to_string(i) +
                                    ", value " + num(v[i]) + ")");
  }
  if (!std::isfinite(t)) throw InvariantError("t", "time must be finite");
  return FlowState{grid, std::move(rho), std::move(v), t};
}

FlowState FlowState::sample(const RoadGrid& grid, const Profile& rho, const Profile& v, double t) {
  std::vector<double> r(grid.n_cells), u(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    r[i] = rho(grid.center(i));
    u[i] = v(grid.center(i));
  }
  return make(grid, std::move(r), std::move(u), t);
}

double FlowState::total_mass() const {
  double m = 0.0;
  for (double r : rho) m += r;
  return m * grid.dx();
}

// ---------------------------------------------------------------------------

void check_force(const ForceLaw& f, std::vector<Violation>& out, const std::string& prefix) {
  if (!(f.f0 > 0.0) || !std::isfinite(f.f0))
    add(out, prefix + ".f0", "positive acceleration", "f0 must be > 0");
  if (!(f.delta > 0.0) || !(f.delta < f.v_star) || !std::isfinite(f.v_star))
    add(out, prefix + ".delta", "speed margin", "need 0 < delta < v_star");
}

ForceLaw ForceLaw::make(double f0, double v_star, double delta) {
  ForceLaw f{f0, v_star, delta};
  std::vector<Violation> v;
  check_force(f, v);
  throw_first(v);
  return f;
}

double ForceLaw::operator()(double v) const {
  if (v < v_star - delta) return f0;
  if (v > v_star) return 0.0;
  return f0 * (v_star - v) / delta;
}

double evaluate_force(const ForceLaw& law, double v) { return law(v); }

double evaluate_force(const ForceOption& law, double v) { return law ? (*law)(v) : 0.0; }

// ---------------------------------------------------------------------------

void check_timing(const SignalTiming& s, std::vector<Violation>& out, const std::string& prefix) {
  if (!(s.tau0 > 0.0)) add(out, prefix + ".tau0", "braking lead time", "tau0 must be > 0");
  if (!(s.t0 > s.tau0)) add(out, prefix + ".t0", "braking after start", "t0 must exceed tau0");
  if (!(s.tau1 > 0.0)) add(out, prefix + ".tau1", "red duration", "tau1 must be > 0");
  if (!(s.h > 0.0) || !(s.h < s.x0))
    add(out, prefix + ".h", "braking zone", "need 0 < h < x0");
}

SignalTiming SignalTiming::make(double x0, double t0, double tau0, double tau1, double h) {
  SignalTiming s{x0, t0, tau0, tau1, h};
  std::vector<Violation> v;
  check_timing(s, v);
  throw_first(v);
  return s;
}

BrakingProfile default_braking_profile(const SignalTiming& timing, double v_handoff) {
  if (!(timing.tau0 > 0.0)) throw InvariantError("signal.tau0", "tau0 must be > 0");
  if (!(v_handoff >= 0.0) || !std::isfinite(v_handoff))
    throw InvariantError("v_handoff", "handoff speed must be finite and >= 0");
  const double start = timing.braking_start();
  const double tau0 = timing.tau0;
  const double x0 = timing.x0;
  const double h = timing.h;
  // ease(t) falls from 1 at the braking start to exactly 0 at t0 and stays there.
  auto ease = [start, tau0](double t) {
    const double s = std::clamp((t - start) / tau0, 0.0, 1.0);
    return 0.5 * (1.0 + std::cos(std::numbers::pi * s));
  };
  const double t0 = timing.t0;
  BrakingProfile b;
  b.gamma = Profile::custom(
      [=](double t) { return t >= t0 ? x0 : x0 - h * ease(t); }, "cosine-ease gamma");
  b.speed = Profile::custom(
      [=](double t) { return t >= t0 ? 0.0 : v_handoff * ease(t); }, "cosine-ease V");
  b.is_default = true;
  return b;
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate_scenario(const Scenario& s, bool oracle_requested) {
  std::vector<Violation> out;
  check_grid(s.grid, out);
  const bool grid_ok = out.empty();
  if (s.force) check_force(*s.force, out);
  check_timing(s.timing, out);

  const auto& tm = s.timing;
  if (grid_ok) {
    if (!(s.grid.x_min < tm.x0 - tm.h))
      add(out, "signal.h", "braking zone on road", "x0 - h must lie inside the road (> x_min)");
    if (!(tm.x0 < s.grid.x_max))
      add(out, "signal.x0", "intersection on road", "x0 must be < x_max");
    if (s.grid.x_min < tm.x0 - tm.h && tm.x0 < s.grid.x_max && tm.h > 0.0) {
      const int split = nearest_face(s.grid, tm.x0 - tm.h);
      const int stop = nearest_face(s.grid, tm.x0);
      if (split < 4 || s.grid.n_cells - split < 4)
        add(out, "signal.h", "resolvable split",
            "the braking-zone start must leave at least 4 cells on each side");
      if (stop <= split)
        add(out, "signal.h", "resolvable braking zone",
            "braking zone shorter than one cell after snapping to faces");
    }
  }
  if (!(s.mu > 0.0) || !std::isfinite(s.mu)) add(out, "mu", "positive viscosity", "mu must be > 0");
  if (!(s.t_end >= tm.t0 + tm.tau1))
    add(out, "t_end", "covers red phase", "t_end must be >= t0 + tau1");
  if (!(s.numerics.cfl > 0.0 && s.numerics.cfl <= 1.0))
    add(out, "numerics.cfl", "CFL range", "cfl must lie in (0, 1]");
  if (!(s.numerics.parabolic_dt > 0.0))
    add(out, "numerics.parabolic_dt", "positive step", "parabolic_dt must be > 0");
  if (!(s.numerics.snapshot_interval > 0.0))
    add(out, "numerics.snapshot_interval", "positive interval", "snapshot_interval must be > 0");

  if (grid_ok) {
    for (int i = 0; i < s.grid.n_cells; ++i) {
      const double x = s.grid.center(i);
      const double r = s.rho0(x);
      if (!std::isfinite(r) || r < 0.0) {
        add(out, "initial.rho", "non-negative initial density",
            "rho0(" + num(x) + ") = " + num(r) + " must be finite and >= 0");
        break;
      }
      if (oracle_requested && !(r > 0.0)) {
        add(out, "initial.rho", "positive initial density (mass-coordinate map invertible)",
            "rho0(" + num(x) + ") = " + num(r) + " must be > 0 for the mass-coordinate oracle");
        break;
      }
    }
    for (int i = 0; i < s.grid.n_cells; ++i) {
      const double x = s.grid.center(i);
      const double v = s.v0(x);
      if (!std::isfinite(v) || v < 0.0) {
        add(out, "initial.v", "non-negative initial velocity",
            "v0(" + num(x) + ") = " + num(v) + " must be finite and >= 0");
        break;
      }
    }
  }

  const double horizon = std::max(s.t_end, 0.0);
  constexpr int kTimeSamples = 400;
  for (int k = 0; k <= kTimeSamples; ++k) {
    const double t = horizon * k / kTimeSamples;
    const double r = s.inflow.rho_in(t);
    if (!std::isfinite(r) || r < 0.0) {
      add(out, "inflow.rho", "non-negative inflow density",
          "rho_in(" + num(t) + ") = " + num(r) + " must be finite and >= 0");
      break;
    }
  }
  for (int k = 0; k <= kTimeSamples; ++k) {
    const double t = horizon * k / kTimeSamples;
    const double v = s.inflow.v_in(t);
    if (!std::isfinite(v) || v < 0.0) {
      add(out, "inflow.v", "non-negative inflow velocity",
          "v_in(" + num(t) + ") = " + num(v) + " must be finite and >= 0");
      break;
    }
  }

  if (s.braking && tm.tau0 > 0.0) {
    const auto& b = *s.braking;
    const double start = tm.braking_start();
    const double scale = 1e-9 * std::max(1.0, std::abs(tm.x0));
    if (std::abs(b.gamma(start) - (tm.x0 - tm.h)) > scale)
      add(out, "braking.gamma", "boundary starts at braking zone",
          "gamma(t0 - tau0) must equal x0 - h");
    if (std::abs(b.speed(tm.t0)) > 0.0)
      add(out, "braking.V", "stopped at red onset",
          "V(t0) = " + num(b.speed(tm.t0)) + " must be 0");
    const double end = std::max(s.t_end, tm.t0 + tm.tau1);
    double prev_gamma = b.gamma(start);
    bool mono_ok = true, hold_ok = true, v_nonneg = true, v_zero = true;
    for (int k = 1; k <= kTimeSamples; ++k) {
      const double t = start + (end - start) * k / kTimeSamples;
      const double g = b.gamma(t);
      const double v = b.speed(t);
      if (g < prev_gamma - scale) mono_ok = false;
      prev_gamma = g;
      if (t >= tm.t0 && std::abs(g - tm.x0) > scale) hold_ok = false;
      if (!(v >= 0.0)) v_nonneg = false;
      if (t >= tm.t0 && v != 0.0) v_zero = false;
    }
    if (!mono_ok)
      add(out, "braking.gamma", "non-decreasing boundary", "gamma must be non-decreasing");
    if (!hold_ok)
      add(out, "braking.gamma", "boundary holds at the light", "gamma(t) must equal x0 for t >= t0");
    if (!v_nonneg) add(out, "braking.V", "non-negative boundary speed", "V(t) must be >= 0");
    if (!v_zero)
      add(out, "braking.V", "stopped during red", "V(t) must vanish for all t >= t0");
  }
  return out;
}

}  // namespace sigflow
