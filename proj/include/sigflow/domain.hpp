#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigflow/profile.hpp"

namespace sigflow {

/// Uniform cell-centred grid on [x_min, x_max].
struct RoadGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 4;

  static RoadGrid make(double x_min, double x_max, int n_cells);

  double length() const { return x_max - x_min; }
  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
  double face(int i) const { return x_min + i * dx(); }
  bool operator==(const RoadGrid&) const = default;
};

/// Density (veh/m) and velocity (m/s) per cell at time t (s).
struct FlowState {
  RoadGrid grid;
  std::vector<double> rho;
  std::vector<double> v;
  double t = 0.0;

  /// Validating constructor: sizes match the grid, values finite and >= 0.
  static FlowState make(RoadGrid grid, std::vector<double> rho, std::vector<double> v, double t);
  /// Samples the profiles at cell centres.
  static FlowState sample(const RoadGrid& grid, const Profile& rho, const Profile& v, double t = 0.0);

  /// Sum of rho * dx.
  double total_mass() const;
};

/// Driver acceleration as a function of speed: f0 below v_star - delta,
/// zero above v_star, linear in between.
struct ForceLaw {
  double f0 = 1.0;
  double v_star = 1.0;
  double delta = 0.5;

  static ForceLaw make(double f0, double v_star, double delta);
  double operator()(double v) const;
  bool operator==(const ForceLaw&) const = default;
};

/// Absent force law means the acceleration term is switched off.
using ForceOption = std::optional<ForceLaw>;

double evaluate_force(const ForceLaw& law, double v);
double evaluate_force(const ForceOption& law, double v);

struct SignalTiming {
  double x0 = 0.0;    ///< intersection position
  double t0 = 0.0;    ///< red onset
  double tau0 = 0.0;  ///< braking lead time
  double tau1 = 0.0;  ///< red duration
  double h = 0.0;     ///< braking-zone length

  static SignalTiming make(double x0, double t0, double tau0, double tau1, double h);
  double braking_start() const { return t0 - tau0; }
  double green_time() const { return t0 + tau1; }
};

/// Moving braking boundary gamma(t) and the velocity V(t) prescribed on it.
struct BrakingProfile {
  Profile gamma;
  Profile speed;
  bool is_default = false;
};

BrakingProfile default_braking_profile(const SignalTiming& timing, double v_handoff);

/// Inflow density and speed at the left end of the road as functions of time.
struct BoundaryData {
  Profile rho_in = Profile::constant(0.0);
  Profile v_in = Profile::constant(0.0);

  double flux(double t) const { return rho_in(t) * v_in(t); }
};

enum class Model { First, Second };

struct Numerics {
  double cfl = 0.5;
  double parabolic_dt = 1e-3;
  double snapshot_interval = 1.0;
};

struct Scenario {
  Model model = Model::First;
  RoadGrid grid;
  Profile rho0;
  Profile v0;
  BoundaryData inflow;
  SignalTiming timing;
  std::optional<BrakingProfile> braking;  ///< empty: built at handoff from the free-flow solution
  ForceOption force;
  bool braking_phase_force = false;  ///< acceleration in the upstream flow during red
  double mu = 1.0;
  double t_end = 0.0;
  Numerics numerics;
};

struct Violation {
  std::string field;      ///< dotted path, e.g. "signal.tau0"
  std::string condition;  ///< short name of the violated condition
  std::string message;
};

/// Checks every invariant that can be decided before running. Never throws.
std::vector<Violation> validate_scenario(const Scenario& s, bool oracle_requested = false);

/// Violations of the individual types, appended to `out`.
void check_grid(const RoadGrid& g, std::vector<Violation>& out, const std::string& prefix = "grid");
void check_force(const ForceLaw& f, std::vector<Violation>& out, const std::string& prefix = "force");
void check_timing(const SignalTiming& s, std::vector<Violation>& out,
                  const std::string& prefix = "signal");

constexpr double kCompatibilityTolerance = 1e-6;  // m/s

}  // namespace sigflow
