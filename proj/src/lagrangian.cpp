#include "sigflow/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sigflow/error.hpp"

namespace sigflow::lagrangian {

namespace {

// Specific volume below which the characteristic system is considered broken down.
constexpr double kVolumeFloor = 1e-12;

double extrapolate_positive(double end, double next) {
  return std::clamp(1.5 * end - 0.5 * next, 0.5 * end, 2.0 * end);
}

// d v / d xi at every sample; three-point formula on the non-uniform spacing.
std::vector<double> xi_gradient(const std::vector<double>& xi, const std::vector<double>& v) {
  const std::size_t n = xi.size();
  std::vector<double> g(n, 0.0);
  if (n < 2) return g;
  g.front() = (v[1] - v[0]) / (xi[1] - xi[0]);
  g.back() = (v[n - 1] - v[n - 2]) / (xi[n - 1] - xi[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h1 = xi[k] - xi[k - 1];
    const double h2 = xi[k + 1] - xi[k];
    g[k] = (h1 * h1 * (v[k + 1] - v[k]) + h2 * h2 * (v[k] - v[k - 1])) / (h1 * h2 * (h1 + h2));
  }
  return g;
}

// (v, specific volume) for every characteristic
struct Characteristics {
  std::vector<double> v;
  std::vector<double> r;
};

Characteristics rate(const std::vector<double>& xi, const Characteristics& y,
                     const ForceOption& force) {
  Characteristics d{std::vector<double>(y.v.size()), xi_gradient(xi, y.v)};
  for (std::size_t k = 0; k < y.v.size(); ++k) d.v[k] = evaluate_force(force, y.v[k]);
  return d;
}

Characteristics axpy(const Characteristics& y, double a, const Characteristics& d) {
  Characteristics out = y;
  for (std::size_t k = 0; k < y.v.size(); ++k) {
    out.v[k] += a * d.v[k];
    out.r[k] += a * d.r[k];
  }
  return out;
}

Characteristics rk4(const std::vector<double>& xi, const Characteristics& y, double dt,
                    const ForceOption& force) {
  const auto k1 = rate(xi, y, force);
  const auto k2 = rate(xi, axpy(y, 0.5 * dt, k1), force);
  const auto k3 = rate(xi, axpy(y, 0.5 * dt, k2), force);
  const auto k4 = rate(xi, axpy(y, dt, k3), force);
  Characteristics out = y;
  for (std::size_t k = 0; k < y.v.size(); ++k) {
    out.v[k] += dt / 6.0 * (k1.v[k] + 2.0 * k2.v[k] + 2.0 * k3.v[k] + k4.v[k]);
    out.r[k] += dt / 6.0 * (k1.r[k] + 2.0 * k2.r[k] + 2.0 * k3.r[k] + k4.r[k]);
  }
  return out;
}

// Step doubling: accept when one step and two half steps agree, otherwise split.
Characteristics adaptive_rk4(const std::vector<double>& xi, const Characteristics& y, double dt,
                             const ForceOption& force, int depth = 0) {
  const auto whole = rk4(xi, y, dt, force);
  if (!force) return whole;  // exact for vanishing force: v frozen, r linear in time
  const auto half = rk4(xi, rk4(xi, y, 0.5 * dt, force), 0.5 * dt, force);
  double err = 0.0, scale = 1.0;
  for (std::size_t k = 0; k < y.v.size(); ++k) {
    err = std::max(err, std::abs(whole.v[k] - half.v[k]));
    scale = std::max(scale, std::abs(half.v[k]));
  }
  if (err <= 1e-12 * scale || depth >= 12) return half;
  const auto mid = adaptive_rk4(xi, y, 0.5 * dt, force, depth + 1);
  return adaptive_rk4(xi, mid, 0.5 * dt, force, depth + 1);
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

}  // namespace

MassField to_mass_coordinates(const FlowState& state) {
  const int n = state.grid.n_cells;
  for (int i = 0; i < n; ++i) {
    if (!(state.rho[i] > 0.0)) {
      std::ostringstream os;
      os << "density must be > 0 for the mass-coordinate map to be invertible (cell " << i
         << ", x = " << state.grid.center(i) << ")";
      throw InvariantError("rho", os.str());
    }
  }
  std::vector<double> x, rho, v;
  x.reserve(n + 2);
  x.push_back(state.grid.x_min);
  rho.push_back(extrapolate_positive(state.rho[0], state.rho[1]));
  v.push_back(std::max(0.0, 1.5 * state.v[0] - 0.5 * state.v[1]));
  for (int i = 0; i < n; ++i) {
    x.push_back(state.grid.center(i));
    rho.push_back(state.rho[i]);
    v.push_back(state.v[i]);
  }
  x.push_back(state.grid.x_max);
  rho.push_back(extrapolate_positive(state.rho[n - 1], state.rho[n - 2]));
  v.push_back(std::max(0.0, 1.5 * state.v[n - 1] - 0.5 * state.v[n - 2]));

  MassField f{state.grid.x_min, std::vector<double>(x.size(), 0.0), rho, v, state.t, 0.0};
  for (std::size_t k = 1; k < x.size(); ++k)
    f.xi[k] = f.xi[k - 1] + 0.5 * (rho[k - 1] + rho[k]) * (x[k] - x[k - 1]);
  return f;
}

PositionMap::PositionMap(std::vector<double> xi, std::vector<double> x)
    : xi_(std::move(xi)), x_(std::move(x)) {
  if (xi_.size() != x_.size() || xi_.empty())
    throw std::invalid_argument("PositionMap: mismatched or empty samples");
}

double PositionMap::operator()(double xi) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(xi_.back()));
  if (xi < xi_.front() - tol || xi > xi_.back() + tol) {
    std::ostringstream os;
    os << "mass coordinate " << xi << " outside mapped range [" << xi_.front() << ", "
       << xi_.back() << "]";
    throw std::out_of_range(os.str());
  }
  return interpolate(xi_, x_, xi);
}

PositionMap invert_initial_map(const MassField& field) {
  std::vector<double> x(field.xi.size());
  x[0] = field.origin + 0.0;
  for (std::size_t k = 1; k < field.xi.size(); ++k) {
    const double denom = field.rho_hat[k - 1] + field.rho_hat[k];
    if (!(denom > 0.0)) throw InvariantError("rho_hat", "density must be > 0");
    x[k] = x[k - 1] + 2.0 * (field.xi[k] - field.xi[k - 1]) / denom;
  }
  // the first sample sits at xi = field.xi[0], which is 0 for a freshly transformed field
  if (field.xi.front() > 0.0) {
    for (double& p : x) p += field.xi.front() / field.rho_hat.front();
  }
  return PositionMap(field.xi, std::move(x));
}

MassField advance_characteristics(const MassField& field, const BoundaryData& inflow,
                                  const ForceOption& force, double t_end, int n_steps) {
  if (!(t_end > field.t)) throw InvariantError("t_end", "must exceed the field time");
  if (n_steps < 1) throw InvariantError("n_steps", "must be >= 1");
  if (field.xi.size() < 2) throw InvariantError("xi", "need at least two samples");

  const double spacing = (field.xi.back() - field.xi.front()) / (field.xi.size() - 1);
  const double dt = (t_end - field.t) / n_steps;

  std::vector<double> xi = field.xi;
  Characteristics y{field.v_hat, std::vector<double>(field.rho_hat.size())};
  for (std::size_t k = 0; k < y.r.size(); ++k) {
    if (!(field.rho_hat[k] > 0.0)) throw InvariantError("rho_hat", "density must be > 0");
    y.r[k] = 1.0 / field.rho_hat[k];
  }
  double a_integral = field.a_integral;

  auto seed = [&](double t) {
    const double rho_in = inflow.rho_in(t);
    if (!(rho_in > 0.0))
      throw BreakdownError("inflow density must be > 0 while vehicles enter the road");
    xi.insert(xi.begin(), 0.0);
    y.v.insert(y.v.begin(), inflow.v_in(t));
    y.r.insert(y.r.begin(), 1.0 / rho_in);
  };

  for (int s = 0; s < n_steps; ++s) {
    const double t = field.t + s * dt;
    if (inflow.flux(t) > 0.0 && xi.front() >= spacing) seed(t);

    y = adaptive_rk4(xi, y, dt, force);
    for (std::size_t k = 0; k < y.r.size(); ++k) {
      if (!(y.r[k] > kVolumeFloor)) {
        std::ostringstream os;
        os << "characteristics crossed near xi = " << xi[k] << " before t = " << t + dt;
        throw BreakdownError(os.str());
      }
    }
    const double shift = 0.5 * (inflow.flux(t) + inflow.flux(t + dt)) * dt;
    for (double& p : xi) p += shift;
    a_integral += shift;
  }
  if (inflow.flux(t_end) > 0.0 && xi.front() > 0.0) seed(t_end);

  MassField out{field.origin, std::move(xi), std::vector<double>(y.r.size()), std::move(y.v),
                t_end, a_integral};
  for (std::size_t k = 0; k < y.r.size(); ++k) out.rho_hat[k] = 1.0 / y.r[k];
  return out;
}

FlowState reconstruct_physical(const MassField& field, const RoadGrid& grid) {
  for (double r : field.rho_hat) {
    if (!(r > 0.0)) throw InvariantError("rho_hat", "density must be > 0 to reconstruct");
  }
  const PositionMap map = invert_initial_map(field);
  const auto& x = map.positions();
  const double tol = 1e-9 * std::max(1.0, grid.length());
  std::vector<double> rho(grid.n_cells), v(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    const double xc = grid.center(i);
    if (xc < x.front() - tol || xc > x.back() + tol) {
      std::ostringstream os;
      os << "cell centre " << xc << " lies outside the reconstructed range [" << x.front() << ", "
         << x.back() << "]";
      throw Error(os.str());
    }
    rho[i] = interpolate(x, field.rho_hat, xc);
    v[i] = interpolate(x, field.v_hat, xc);
  }
  return FlowState::make(grid, std::move(rho), std::move(v), field.t);
}

double estimate_breakdown_time(const FlowState& state, const ForceOption&) {
  // A uniform force shifts every characteristic by the same F0 t^2 / 2, so
  // crossings depend on the initial slope alone.
  double min_slope = 0.0;
  const double dx = state.grid.dx();
  for (int i = 0; i + 1 < state.grid.n_cells; ++i)
    min_slope = std::min(min_slope, (state.v[i + 1] - state.v[i]) / dx);
  return min_slope < 0.0 ? -1.0 / min_slope : kNoBreakdown;
}

FlowState solve_oracle(const FlowState& initial, const BoundaryData& inflow,
                       const ForceOption& force, double t_end, int n_steps,
                       const RoadGrid& output) {
  const double t_star = estimate_breakdown_time(initial, force);
  if (!(t_end - initial.t < kBreakdownSafety * t_star)) {
    std::ostringstream os;
    os << "oracle horizon " << t_end - initial.t << " s is not below " << kBreakdownSafety
       << " x breakdown time " << t_star << " s";
    throw BreakdownError(os.str());
  }
  MassField f = to_mass_coordinates(initial);
  if (t_end > initial.t) f = advance_characteristics(f, inflow, force, t_end, n_steps);
  return reconstruct_physical(f, output);
}

}  // namespace sigflow::lagrangian
