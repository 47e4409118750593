// sigflow: traffic flow through a signalised junction.
//
//   sigflow simulate --config scenario.yaml --out results/ [--model first|second]
//                    [--nx N] [--oracle-check] [--plot rho|v]
//   sigflow verify-oracle --config scenario.yaml [--nx N]
//   sigflow validate --config scenario.yaml
//
// Exit status: 0 success, 1 run failure, 2 invalid input.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "sigflow/error.hpp"
#include "sigflow/lagrangian.hpp"
#include "sigflow/orchestrator.hpp"
#include "sigflow/output.hpp"
#include "sigflow/scenario_io.hpp"
#include "sigflow/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitInvalid = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("sigflow");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SIGFLOW_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("unknown SIGFLOW_LOG level '{}', keeping info", env);
    else
      spdlog::set_level(level);
  }
}

std::optional<sigflow::Scenario> load(const std::string& path, bool oracle, std::optional<int> nx) {
  auto parsed = sigflow::load_scenario(path, oracle);
  if (parsed.ok() && nx) {
    parsed.scenario->grid.n_cells = *nx;
    for (const auto& v : sigflow::validate_scenario(*parsed.scenario, oracle))
      parsed.errors.push_back({0, 0, v.field, v.message + " [" + v.condition + "] (with --nx)"});
  }
  if (!parsed.errors.empty()) {
    for (const auto& e : parsed.errors) std::cerr << path << ": " << e.to_string() << "\n";
    return std::nullopt;
  }
  return parsed.scenario;
}

int cmd_validate(const std::string& config) {
  const auto s = load(config, false, std::nullopt);
  if (!s) return kExitInvalid;
  const auto plan = sigflow::build_phase_plan(*s);
  std::cout << config << ": ok (model " << sigflow::to_string(s->model) << ", "
            << s->grid.n_cells << " cells, " << plan.phases.size() << " phases)\n";
  return kExitOk;
}

int cmd_verify_oracle(const std::string& config, std::optional<int> nx) {
  const auto s = load(config, true, nx);
  if (!s) return kExitInvalid;
  const double horizon = sigflow::oracle_horizon(*s);
  if (!(horizon > 0.0)) {
    std::cerr << "no usable oracle horizon (flashing green at t=0 or breakdown imminent)\n";
    return kExitInvalid;
  }
  try {
    const int n = s->grid.n_cells;
    spdlog::info("oracle horizon {} s, comparing at {} and {} cells", horizon, n, 4 * n);
    const auto coarse = sigflow::compare_with_oracle(*s, n, horizon);
    const auto fine = sigflow::compare_with_oracle(*s, 4 * n, horizon);
    std::cout << "horizon_s " << horizon << "\n";
    std::cout << "breakdown_time_s " << coarse.breakdown_time << "\n";
    for (const auto* c : {&coarse, &fine})
      std::cout << "n=" << c->n_cells << " l1_rho " << c->l1_rho << " l1_v " << c->l1_v << "\n";
    const double ratio = (coarse.l1_rho + coarse.l1_v) / (fine.l1_rho + fine.l1_v);
    std::cout << "error_ratio " << ratio << "\n";
  } catch (const std::exception& e) {
    std::cerr << "oracle comparison failed: " << e.what() << "\n";
    return kExitRunFailed;
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config, const std::string& out_dir,
                 const std::string& model, std::optional<int> nx, bool oracle_check,
                 const std::string& plot) {
  auto s = load(config, oracle_check, nx);
  if (!s) return kExitInvalid;
  if (model == "first") s->model = sigflow::Model::First;
  if (model == "second") s->model = sigflow::Model::Second;

  sigflow::ReportExtras extras;
  extras.scenario_path = config;
  if (oracle_check) {
    try {
      const double horizon = sigflow::oracle_horizon(*s);
      if (horizon > 0.0) extras.oracle = sigflow::compare_with_oracle(*s, s->grid.n_cells, horizon);
      else spdlog::warn("oracle check skipped: no usable horizon");
    } catch (const std::exception& e) {
      spdlog::warn("oracle check failed: {}", e.what());
    }
  }

  spdlog::info("running model {} on {} cells to t={}", sigflow::to_string(s->model),
               s->grid.n_cells, s->t_end);
  const auto run = sigflow::run_model(*s);
  for (const auto& pr : run.phases)
    spdlog::debug("phase {}: {} steps, {} snapshots, {:.3f} s", pr.phase.name,
                  pr.trajectory.steps, pr.trajectory.snapshots.size(), pr.wall_seconds);

  const std::filesystem::path out(out_dir);
  try {
    const int files = sigflow::write_snapshots(run, out / "snapshots");
    sigflow::write_report(*s, run, out / "report.json", extras);
    spdlog::info("wrote {} snapshots and {}", files, (out / "report.json").string());
    if (!plot.empty() && !run.phases.empty()) {
      const auto field = plot == "rho" ? sigflow::PlotField::Density : sigflow::PlotField::Velocity;
      sigflow::emit_plot(run, s->timing, field, out / ("plot_" + plot));
    }
  } catch (const std::exception& e) {
    std::cerr << "output failed: " << e.what() << "\n";
    return kExitRunFailed;
  }

  if (!run.ok()) {
    std::cerr << "phase '" << run.failed_phase << "' failed: " << run.error << "\n";
    return kExitRunFailed;
  }
  const auto balance = sigflow::mass_balance_report(run);
  std::cout << "mass_closure_residual " << balance.residual << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Traffic flow through a signalised junction"};
  app.require_subcommand(1);

  std::string config, out_dir, model, plot;
  std::optional<int> nx;
  bool oracle_check = false;

  auto* sim = app.add_subcommand("simulate", "Run a signal cycle and write snapshots and a report");
  sim->add_option("--config", config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--model", model, "Override the scenario model")
      ->check(CLI::IsMember({"first", "second"}));
  sim->add_option("--nx", nx, "Override the number of cells")->check(CLI::PositiveNumber);
  sim->add_flag("--oracle-check", oracle_check, "Compare free flow against the mass-coordinate oracle");
  sim->add_option("--plot", plot, "Write a space-time plot of rho or v")
      ->check(CLI::IsMember({"rho", "v"}));

  auto* ver = app.add_subcommand("verify-oracle", "Compare free flow against the oracle at two resolutions");
  ver->add_option("--config", config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  ver->add_option("--nx", nx, "Override the number of cells")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Check a scenario file");
  val->add_option("--config", config, "Scenario YAML file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*sim) return cmd_simulate(config, out_dir, model, nx, oracle_check, plot);
    if (*ver) return cmd_verify_oracle(config, nx);
    if (*val) return cmd_validate(config);
  } catch (const sigflow::InvariantError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailed;
  }
  return kExitInvalid;
}
