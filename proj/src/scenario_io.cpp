#include "sigflow/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sigflow/format.hpp"

namespace sigflow {

std::string ParseError::to_string() const {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ", column " << column << ": ";
  if (!field.empty()) os << field << ": ";
  os << message;
  return os.str();
}

namespace {

class Reader {
 public:
  explicit Reader(std::vector<ParseError>& errors) : errors_(errors) {}

  void error(const YAML::Node& node, const std::string& field, const std::string& message) {
    const auto mark = node.Mark();
    const bool known = mark.line >= 0 && !node.IsNull();
    errors_.push_back({known ? mark.line + 1 : 0, known ? mark.column + 1 : 0, field, message});
  }

  void remember(const std::string& field, const YAML::Node& node) {
    const auto mark = node.Mark();
    if (mark.line >= 0) marks_[field] = {mark.line + 1, mark.column + 1};
  }

  std::pair<int, int> locate(const std::string& field) const {
    std::string f = field;
    while (true) {
      auto it = marks_.find(f);
      if (it != marks_.end()) return it->second;
      const auto dot = f.rfind('.');
      if (dot == std::string::npos) return {0, 0};
      f = f.substr(0, dot);
    }
  }

  void check_keys(const YAML::Node& map, const std::string& prefix,
                  const std::set<std::string>& allowed) {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key))
        error(kv.first, prefix.empty() ? key : prefix + "." + key, "unknown key '" + key + "'");
    }
  }

  YAML::Node section(const YAML::Node& root, const std::string& key, bool required) {
    const YAML::Node node = root[key];
    if (!node) {
      if (required) errors_.push_back({0, 0, key, "missing required section"});
      return {};
    }
    remember(key, node);
    if (!node.IsMap()) {
      error(node, key, "expected a mapping");
      return {};
    }
    return node;
  }

  std::optional<double> number(const YAML::Node& map, const std::string& key,
                               const std::string& field, std::optional<double> fallback) {
    const YAML::Node node = map.IsMap() ? map[key] : YAML::Node(YAML::NodeType::Undefined);
    if (!node) {
      if (!fallback) errors_.push_back({0, 0, field, "missing required value"});
      return fallback;
    }
    remember(field, node);
    try {
      const double v = parse_double(node.as<std::string>());
      if (!std::isfinite(v)) throw std::invalid_argument("not finite");
      return v;
    } catch (const std::exception&) {
      error(node, field, "expected a finite number");
      return std::nullopt;
    }
  }

  std::optional<int> integer(const YAML::Node& map, const std::string& key,
                             const std::string& field) {
    const auto v = number(map, key, field, std::nullopt);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v || std::abs(*v) > 1e9) {
      error(map[key], field, "expected an integer");
      return std::nullopt;
    }
    return static_cast<int>(*v);
  }

  std::optional<Profile> profile(const YAML::Node& map, const std::string& key,
                                 const std::string& field) {
    const YAML::Node node = map.IsMap() ? map[key] : YAML::Node(YAML::NodeType::Undefined);
    if (!node) {
      errors_.push_back({0, 0, field, "missing required profile"});
      return std::nullopt;
    }
    remember(field, node);
    try {
      if (node.IsSequence()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : node) {
          if (!row.IsSequence() || row.size() != 2)
            throw std::invalid_argument("table rows must be [position, value] pairs");
          pts.emplace_back(parse_double(row[0].as<std::string>()),
                           parse_double(row[1].as<std::string>()));
        }
        return Profile::table(std::move(pts));
      }
      return Profile::parse(node.as<std::string>());
    } catch (const std::exception& e) {
      error(node, field, e.what());
      return std::nullopt;
    }
  }

 private:
  std::vector<ParseError>& errors_;
  std::map<std::string, std::pair<int, int>> marks_;
};

}  // namespace

ParseResult parse_scenario(const std::string& text, bool oracle_requested) {
  ParseResult result;
  auto& errors = result.errors;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    errors.push_back({e.mark.line + 1, e.mark.column + 1, "", e.msg});
    return result;
  }
  if (!root.IsMap()) {
    errors.push_back({1, 1, "", "scenario document must be a mapping"});
    return result;
  }

  Reader rd(errors);
  rd.check_keys(root, "",
                {"model", "grid", "signal", "force", "mu", "t_end", "numerics", "initial",
                 "inflow", "braking", "braking_phase_force"});

  Scenario s;
  if (const auto m = root["model"]) {
    rd.remember("model", m);
    const auto name = m.as<std::string>();
    if (name == "first")
      s.model = Model::First;
    else if (name == "second")
      s.model = Model::Second;
    else
      rd.error(m, "model", "model must be 'first' or 'second'");
  }

  const auto grid = rd.section(root, "grid", true);
  if (grid.IsMap()) rd.check_keys(grid, "grid", {"x_min", "x_max", "n_cells"});
  const auto x_min = rd.number(grid, "x_min", "grid.x_min", std::nullopt);
  const auto x_max = rd.number(grid, "x_max", "grid.x_max", std::nullopt);
  const auto n_cells = rd.integer(grid, "n_cells", "grid.n_cells");

  const auto signal = rd.section(root, "signal", true);
  if (signal.IsMap()) rd.check_keys(signal, "signal", {"x0", "t0", "tau0", "tau1", "h"});
  const auto x0 = rd.number(signal, "x0", "signal.x0", std::nullopt);
  const auto t0 = rd.number(signal, "t0", "signal.t0", std::nullopt);
  const auto tau0 = rd.number(signal, "tau0", "signal.tau0", std::nullopt);
  const auto tau1 = rd.number(signal, "tau1", "signal.tau1", std::nullopt);
  const auto h = rd.number(signal, "h", "signal.h", std::nullopt);

  const YAML::Node force = root["force"];
  if (!force) {
    errors.push_back({0, 0, "force", "missing required section (use 'force: off' to disable)"});
  } else {
    rd.remember("force", force);
    if (force.IsScalar() && force.as<std::string>() == "off") {
      s.force.reset();
    } else if (force.IsMap()) {
      rd.check_keys(force, "force", {"f0", "v_star", "delta"});
      const auto f0 = rd.number(force, "f0", "force.f0", std::nullopt);
      const auto vs = rd.number(force, "v_star", "force.v_star", std::nullopt);
      const auto dl = rd.number(force, "delta", "force.delta", std::nullopt);
      if (f0 && vs && dl) s.force = ForceLaw{*f0, *vs, *dl};
    } else {
      rd.error(force, "force", "expected a mapping or 'off'");
    }
  }

  const auto mu = rd.number(root, "mu", "mu", std::nullopt);
  const auto t_end = rd.number(root, "t_end", "t_end", std::nullopt);

  const auto numerics = rd.section(root, "numerics", false);
  if (numerics.IsMap()) rd.check_keys(numerics, "numerics", {"cfl", "parabolic_dt", "snapshot_interval"});
  const Numerics defaults;
  const auto cfl = rd.number(numerics, "cfl", "numerics.cfl", defaults.cfl);
  const auto pdt = rd.number(numerics, "parabolic_dt", "numerics.parabolic_dt", defaults.parabolic_dt);
  const auto snap = rd.number(numerics, "snapshot_interval", "numerics.snapshot_interval",
                              defaults.snapshot_interval);

  const auto initial = rd.section(root, "initial", true);
  if (initial.IsMap()) rd.check_keys(initial, "initial", {"rho", "v"});
  const auto rho0 = rd.profile(initial, "rho", "initial.rho");
  const auto v0 = rd.profile(initial, "v", "initial.v");

  const auto inflow = rd.section(root, "inflow", true);
  if (inflow.IsMap()) rd.check_keys(inflow, "inflow", {"rho", "v"});
  const auto rho_in = rd.profile(inflow, "rho", "inflow.rho");
  const auto v_in = rd.profile(inflow, "v", "inflow.v");

  if (const auto braking = rd.section(root, "braking", false); braking.IsMap()) {
    rd.check_keys(braking, "braking", {"gamma", "V"});
    const auto gamma = rd.profile(braking, "gamma", "braking.gamma");
    const auto speed = rd.profile(braking, "V", "braking.V");
    if (gamma && speed) s.braking = BrakingProfile{*gamma, *speed, false};
  }
  if (const auto bf = root["braking_phase_force"]) {
    rd.remember("braking_phase_force", bf);
    try {
      s.braking_phase_force = bf.as<bool>();
    } catch (const YAML::Exception&) {
      rd.error(bf, "braking_phase_force", "expected true or false");
    }
  }

  if (!errors.empty()) return result;

  s.grid = RoadGrid{*x_min, *x_max, *n_cells};
  s.timing = SignalTiming{*x0, *t0, *tau0, *tau1, *h};
  s.mu = *mu;
  s.t_end = *t_end;
  s.numerics = Numerics{*cfl, *pdt, *snap};
  s.rho0 = *rho0;
  s.v0 = *v0;
  s.inflow = BoundaryData{*rho_in, *v_in};

  for (const auto& v : validate_scenario(s, oracle_requested)) {
    const auto [line, col] = rd.locate(v.field);
    errors.push_back({line, col, v.field, v.message + " [" + v.condition + "]"});
  }
  if (errors.empty()) result.scenario = std::move(s);
  return result;
}

ParseResult load_scenario(const std::string& path, bool oracle_requested) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back({0, 0, "", "cannot open scenario file '" + path + "'"});
    return r;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), oracle_requested);
}

std::string serialize_scenario(const Scenario& s) {
  YAML::Emitter out;
  auto num = [](double v) { return format_double(v); };
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << (s.model == Model::First ? "first" : "second");
  out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "x_min" << YAML::Value << num(s.grid.x_min);
  out << YAML::Key << "x_max" << YAML::Value << num(s.grid.x_max);
  out << YAML::Key << "n_cells" << YAML::Value << s.grid.n_cells;
  out << YAML::EndMap;
  out << YAML::Key << "signal" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "x0" << YAML::Value << num(s.timing.x0);
  out << YAML::Key << "t0" << YAML::Value << num(s.timing.t0);
  out << YAML::Key << "tau0" << YAML::Value << num(s.timing.tau0);
  out << YAML::Key << "tau1" << YAML::Value << num(s.timing.tau1);
  out << YAML::Key << "h" << YAML::Value << num(s.timing.h);
  out << YAML::EndMap;
  if (s.force) {
    out << YAML::Key << "force" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "f0" << YAML::Value << num(s.force->f0);
    out << YAML::Key << "v_star" << YAML::Value << num(s.force->v_star);
    out << YAML::Key << "delta" << YAML::Value << num(s.force->delta);
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "force" << YAML::Value << "off";
  }
  out << YAML::Key << "mu" << YAML::Value << num(s.mu);
  out << YAML::Key << "t_end" << YAML::Value << num(s.t_end);
  out << YAML::Key << "numerics" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "cfl" << YAML::Value << num(s.numerics.cfl);
  out << YAML::Key << "parabolic_dt" << YAML::Value << num(s.numerics.parabolic_dt);
  out << YAML::Key << "snapshot_interval" << YAML::Value << num(s.numerics.snapshot_interval);
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rho" << YAML::Value << YAML::DoubleQuoted << s.rho0.to_string();
  out << YAML::Key << "v" << YAML::Value << YAML::DoubleQuoted << s.v0.to_string();
  out << YAML::EndMap;
  out << YAML::Key << "inflow" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rho" << YAML::Value << YAML::DoubleQuoted << s.inflow.rho_in.to_string();
  out << YAML::Key << "v" << YAML::Value << YAML::DoubleQuoted << s.inflow.v_in.to_string();
  out << YAML::EndMap;
  if (s.braking && !s.braking->is_default) {
    out << YAML::Key << "braking" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "gamma" << YAML::Value << YAML::DoubleQuoted << s.braking->gamma.to_string();
    out << YAML::Key << "V" << YAML::Value << YAML::DoubleQuoted << s.braking->speed.to_string();
    out << YAML::EndMap;
  }
  out << YAML::Key << "braking_phase_force" << YAML::Value << s.braking_phase_force;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace sigflow
