#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sigflow {

/// A scalar function of one variable (position or time) used for initial
/// profiles, boundary data and braking curves.
///
/// Named presets and sampled tables are serializable; `custom` wraps an
/// arbitrary callable and is only meant for programmatic use.
class Profile {
 public:
  enum class Kind { Constant, Linear, Sine, Plateau, Table, Custom };

  Profile();  // constant zero

  static Profile constant(double value);
  static Profile linear(double intercept, double slope);
  /// base + amp * sin(2*pi*s/wavelength + phase)
  static Profile sine(double base, double amp, double wavelength, double phase = 0.0);
  /// `base` outside [start, end], `peak` inside, joined by linear ramps of
  /// width `ramp` that sit outside the plateau.
  static Profile plateau(double base, double peak, double start, double end, double ramp);
  /// Piecewise linear through (s, value) pairs, constant beyond the ends.
  static Profile table(std::vector<std::pair<double, double>> points);
  static Profile custom(std::function<double(double)> fn, std::string label = "custom");

  double operator()(double s) const;

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& params() const noexcept { return params_; }
  const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }
  bool serializable() const noexcept { return kind_ != Kind::Custom; }

  /// Preset call syntax, e.g. `sine(base=0.1, amp=0.02, wavelength=200, phase=0)`.
  /// Tables render as `table(s0:v0, s1:v1, ...)`. Throws for custom profiles.
  std::string to_string() const;

  /// Parses the syntax produced by to_string. Throws std::invalid_argument
  /// with a readable message on unknown presets or bad parameters.
  static Profile parse(const std::string& text);

  /// Same kind and bit-identical parameters (custom profiles never compare equal).
  bool equivalent(const Profile& other) const;

 private:
  Kind kind_ = Kind::Constant;
  std::vector<double> params_;
  std::vector<std::pair<double, double>> points_;
  std::function<double(double)> fn_;
  std::string label_;
};

}  // namespace sigflow
