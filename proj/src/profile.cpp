#include "sigflow/profile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sigflow/format.hpp"

namespace sigflow {

namespace {

struct PresetSpec {
  Profile::Kind kind;
  std::vector<std::string> keys;
  std::vector<bool> optional;
};

const std::map<std::string, PresetSpec>& preset_table() {
  static const std::map<std::string, PresetSpec> table = {
      {"constant", {Profile::Kind::Constant, {"value"}, {false}}},
      {"linear", {Profile::Kind::Linear, {"intercept", "slope"}, {false, false}}},
      {"sine",
       {Profile::Kind::Sine, {"base", "amp", "wavelength", "phase"}, {false, false, false, true}}},
      {"sine_density",
       {Profile::Kind::Sine, {"base", "amp", "wavelength", "phase"}, {false, false, false, true}}},
      {"plateau",
       {Profile::Kind::Plateau,
        {"base", "peak", "start", "end", "ramp"},
        {false, false, false, false, false}}},
  };
  return table;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_args(const std::string& body) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : body) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

Profile::Profile() : kind_(Kind::Constant), params_{0.0} {}

Profile Profile::constant(double value) {
  Profile p;
  p.kind_ = Kind::Constant;
  p.params_ = {value};
  return p;
}

Profile Profile::linear(double intercept, double slope) {
  Profile p;
  p.kind_ = Kind::Linear;
  p.params_ = {intercept, slope};
  return p;
}

Profile Profile::sine(double base, double amp, double wavelength, double phase) {
  if (!(wavelength != 0.0) || !std::isfinite(wavelength))
    throw std::invalid_argument("sine: wavelength must be finite and non-zero");
  Profile p;
  p.kind_ = Kind::Sine;
  p.params_ = {base, amp, wavelength, phase};
  return p;
}

Profile Profile::plateau(double base, double peak, double start, double end, double ramp) {
  if (!(end >= start)) throw std::invalid_argument("plateau: end must be >= start");
  if (!(ramp >= 0.0)) throw std::invalid_argument("plateau: ramp must be >= 0");
  Profile p;
  p.kind_ = Kind::Plateau;
  p.params_ = {base, peak, start, end, ramp};
  return p;
}

Profile Profile::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw std::invalid_argument("table: needs at least one point");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first))
      throw std::invalid_argument("table: abscissae must be strictly increasing");
  }
  Profile p;
  p.kind_ = Kind::Table;
  p.params_.clear();
  p.points_ = std::move(points);
  return p;
}

Profile Profile::custom(std::function<double(double)> fn, std::string label) {
  Profile p;
  p.kind_ = Kind::Custom;
  p.params_.clear();
  p.fn_ = std::move(fn);
  p.label_ = std::move(label);
  return p;
}

double Profile::operator()(double s) const {
  switch (kind_) {
    case Kind::Constant:
      return params_[0];
    case Kind::Linear:
      return params_[0] + params_[1] * s;
    case Kind::Sine:
      return params_[0] +
             params_[1] * std::sin(2.0 * std::numbers::pi * s / params_[2] + params_[3]);
    case Kind::Plateau: {
      const double base = params_[0], peak = params_[1], start = params_[2], end = params_[3],
                   ramp = params_[4];
      if (s >= start && s <= end) return peak;
      if (ramp > 0.0) {
        if (s < start && s > start - ramp) return base + (peak - base) * (s - (start - ramp)) / ramp;
        if (s > end && s < end + ramp) return peak + (base - peak) * (s - end) / ramp;
      }
      return base;
    }
    case Kind::Table: {
      if (s <= points_.front().first) return points_.front().second;
      if (s >= points_.back().first) return points_.back().second;
      auto it = std::upper_bound(points_.begin(), points_.end(), s,
                                 [](double x, const auto& p) { return x < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (s - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    }
    case Kind::Custom:
      return fn_(s);
  }
  return 0.0;
}

std::string Profile::to_string() const {
  std::ostringstream os;
  auto kv = [&](const char* k, double v, bool last = false) {
    os << k << '=' << format_double(v) << (last ? "" : ", ");
  };
  switch (kind_) {
    case Kind::Constant:
      os << "constant(";
      kv("value", params_[0], true);
      break;
    case Kind::Linear:
      os << "linear(";
      kv("intercept", params_[0]);
      kv("slope", params_[1], true);
      break;
    case Kind::Sine:
      os << "sine(";
      kv("base", params_[0]);
      kv("amp", params_[1]);
      kv("wavelength", params_[2]);
      kv("phase", params_[3], true);
      break;
    case Kind::Plateau:
      os << "plateau(";
      kv("base", params_[0]);
      kv("peak", params_[1]);
      kv("start", params_[2]);
      kv("end", params_[3]);
      kv("ramp", params_[4], true);
      break;
    case Kind::Table:
      os << "table(";
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i) os << ", ";
        os << format_double(points_[i].first) << ':' << format_double(points_[i].second);
      }
      break;
    case Kind::Custom:
      throw std::logic_error("profile '" + label_ + "' has no textual form");
  }
  os << ')';
  return os.str();
}

Profile Profile::parse(const std::string& raw) {
  const std::string text = trim(raw);
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw std::invalid_argument("expected preset call like name(key=value, ...), got '" + text +
                                "'");
  const std::string name = trim(text.substr(0, open));
  const auto args = split_args(text.substr(open + 1, text.size() - open - 2));

  if (name == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& a : args) {
      const auto colon = a.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("table entry '" + a + "' must be position:value");
      pts.emplace_back(parse_double(a.substr(0, colon)), parse_double(a.substr(colon + 1)));
    }
    return table(std::move(pts));
  }

  const auto& presets = preset_table();
  const auto found = presets.find(name);
  if (found == presets.end()) throw std::invalid_argument("unknown preset '" + name + "'");
  const PresetSpec& spec = found->second;

  std::map<std::string, double> values;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("preset argument '" + a + "' must be key=value");
    const std::string key = trim(a.substr(0, eq));
    if (std::find(spec.keys.begin(), spec.keys.end(), key) == spec.keys.end())
      throw std::invalid_argument("unknown parameter '" + key + "' for preset '" + name + "'");
    if (values.count(key)) throw std::invalid_argument("duplicate parameter '" + key + "'");
    values[key] = parse_double(a.substr(eq + 1));
  }
  std::vector<double> p;
  for (std::size_t i = 0; i < spec.keys.size(); ++i) {
    auto it = values.find(spec.keys[i]);
    if (it == values.end()) {
      if (!spec.optional[i])
        throw std::invalid_argument("preset '" + name + "' requires parameter '" + spec.keys[i] +
                                    "'");
      p.push_back(0.0);
    } else {
      p.push_back(it->second);
    }
  }
  switch (spec.kind) {
    case Kind::Constant:
      return constant(p[0]);
    case Kind::Linear:
      return linear(p[0], p[1]);
    case Kind::Sine:
      return sine(p[0], p[1], p[2], p[3]);
    case Kind::Plateau:
      return plateau(p[0], p[1], p[2], p[3], p[4]);
    default:
      break;
  }
  throw std::invalid_argument("unsupported preset '" + name + "'");
}

bool Profile::equivalent(const Profile& other) const {
  if (kind_ == Kind::Custom || other.kind_ == Kind::Custom) return false;
  return kind_ == other.kind_ && params_ == other.params_ && points_ == other.points_;
}

}  // namespace sigflow
