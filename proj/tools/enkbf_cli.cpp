#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "enkbf/config.hpp"
#include "enkbf/oracles.hpp"
#include "enkbf/report.hpp"

using namespace enkbf;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> cycles;
  std::optional<std::string> out_dir;
  std::optional<std::string> filter;
  std::optional<std::string> scheme;
  std::optional<int> steps;
};

void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "TOML config file")->required();
  cmd->add_option("--seed", ov.seed, "override [run] seed");
  cmd->add_option("--cycles", ov.cycles, "override [run] cycles");
  cmd->add_option("--out-dir", ov.out_dir, "override [run] out_dir");
  cmd->add_option("--filter", ov.filter,
                  "override filter kind (letkf|etkbf|detkbf|bgr09|br10)");
  cmd->add_option("--scheme", ov.scheme, "override scheme (euler|dsi)");
  cmd->add_option("--steps", ov.steps, "override pseudo-time step count");
}

ExperimentConfig load_with_overrides(const Overrides& ov) {
  ExperimentConfig cfg = load_experiment_config(ov.config_path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.cycles) cfg.cycles = *ov.cycles;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.filter) cfg.filter = parse_filter_kind(*ov.filter);
  if (ov.scheme) cfg.scheme = parse_step_scheme(*ov.scheme);
  if (ov.steps) cfg.pseudo_steps = *ov.steps;
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_run(const Overrides& ov) {
  const ExperimentConfig cfg = load_with_overrides(ov);
  const RunOutput out = run_twin_experiment(cfg);
  write_diagnostics_csv(joined(cfg.out_dir, "diagnostics.csv"),
                        out.diagnostics);
  write_summary_json(joined(cfg.out_dir, "summary.json"), out.summary, cfg);
  if (cfg.dump_inflation_fields) {
    write_inflation_fields_csv(joined(cfg.out_dir, "inflation_fields.csv"),
                               out.inflation_fields);
  }
  std::printf("%s: rmse %.4f (%.4f)  spread %.4f  delta %.4f  failures %ld%s\n",
              filter_kind_name(cfg.filter), out.summary.rmse_mean,
              out.summary.rmse_std, out.summary.spread_mean,
              out.summary.delta_mean, out.summary.failures,
              out.summary.aborted ? "  [aborted]" : "");
  return 0;
}

int cmd_sweep(const Overrides& ov, SuiteKind kind,
              const std::vector<double>& grid, const std::string& csv_name) {
  const ExperimentConfig cfg = load_with_overrides(ov);
  const SuiteResult res = run_suite(kind, cfg, grid);
  write_sweep_csv(joined(cfg.out_dir, csv_name), res.rows);
  double best = std::numeric_limits<double>::infinity();
  double best_param = 0.0;
  for (const auto& row : res.rows) {
    std::printf("%s=%-8g rmse %.4f (%.4f)  spread %.4f  failures %ld\n",
                row.param_name.c_str(), row.param_value, row.rmse_mean,
                row.rmse_std, row.spread_mean, row.failures);
    if (row.failures == 0 && row.rmse_mean < best) {
      best = row.rmse_mean;
      best_param = row.param_value;
    }
  }
  if (std::isfinite(best)) {
    std::printf("minimum rmse %.4f at %g\n", best, best_param);
  }
  return 0;
}

int cmd_beta_ecdf(const Overrides& ov) {
  const ExperimentConfig cfg = load_with_overrides(ov);
  const SuiteResult res = run_suite(SuiteKind::BetaEcdf, cfg, {});
  write_ecdf_csv(joined(cfg.out_dir, "beta_ecdf.csv"), res.ecdf);
  if (!res.ecdf.empty()) {
    double below_01 = 0.0, up_to_1 = 0.0;
    for (const auto& [beta, f] : res.ecdf) {
      if (beta < 0.1) below_01 = f;
      if (beta <= 1.0) up_to_1 = f;
    }
    std::printf(
        "cycles %zu  P(beta<0.1) %.3f  P(beta>1) %.3f  median %.4g  max "
        "%.4g\n",
        res.ecdf.size(), below_01, 1.0 - up_to_1,
        res.ecdf[res.ecdf.size() / 2].first, res.ecdf.back().first);
  }
  return 0;
}

int cmd_spinup(const Overrides& ov, const std::vector<double>& scales) {
  const ExperimentConfig cfg = load_with_overrides(ov);
  const SuiteResult res = run_suite(SuiteKind::Spinup, cfg, scales);
  for (const auto& [name, run] : res.runs) {
    write_diagnostics_csv(joined(cfg.out_dir, name + ".csv"),
                          run.diagnostics);
    double peak = 0.0;
    for (const auto& d : run.diagnostics) {
      if (!d.failed && std::isfinite(d.rmse_a)) {
        peak = std::max(peak, d.rmse_a);
      }
    }
    std::printf("%s: peak rmse %.4f  failures %ld%s\n", name.c_str(), peak,
                run.summary.failures,
                run.summary.aborted ? "  [aborted]" : "");
  }
  return 0;
}

int cmd_oracle_check(int instances, std::uint64_t seed) {
  const OracleSuiteResult transform =
      run_transform_limit_suite(instances, seed);
  std::printf(
      "transform-limit suite: %d passed, %d failed (max rel err %.3e)\n",
      transform.passed, transform.failed, transform.max_rel_error);
  const OracleSuiteResult riccati =
      run_riccati_suite(instances / 4 + 1, seed);
  std::printf(
      "riccati suite:         %d passed, %d failed (max rel err %.3e)\n",
      riccati.passed, riccati.failed, riccati.max_rel_error);
  return (transform.failed == 0 && riccati.failed == 0) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble transform Kalman-Bucy filter experiments"};
  app.require_subcommand(1);

  Overrides ov;
  std::vector<double> grid;
  std::vector<double> scales{1.0, 2.0, 3.0};
  int instances = 100;
  std::uint64_t oracle_seed = 2718;

  auto* run = app.add_subcommand("run", "one twin experiment");
  add_common(run, ov);

  auto* sweep_inf =
      app.add_subcommand("sweep-inflation", "fixed-inflation sweep");
  add_common(sweep_inf, ov);
  sweep_inf->add_option("--grid", grid, "delta values")->delimiter(',');

  auto* sweep_steps =
      app.add_subcommand("sweep-steps", "pseudo-time step-count sweep");
  add_common(sweep_steps, ov);
  sweep_steps->add_option("--grid", grid, "step counts")->delimiter(',');

  auto* ecdf = app.add_subcommand("beta-ecdf",
                                  "stiffness-ratio distribution (letkf)");
  add_common(ecdf, ov);

  auto* spin = app.add_subcommand("spinup", "cold-start stress test");
  add_common(spin, ov);
  spin->add_option("--scales", scales, "noise scales in multiples of R")
      ->delimiter(',');

  auto* oracle = app.add_subcommand("oracle-check",
                                    "analytic-limit and Riccati oracles");
  oracle->add_option("--instances", instances, "random instances");
  oracle->add_option("--seed", oracle_seed, "instance seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(ov);
    if (sweep_inf->parsed()) {
      if (grid.empty()) {
        for (int i = 1; i <= 10; ++i) grid.push_back(0.01 * i);
      }
      return cmd_sweep(ov, SuiteKind::InflationSweep, grid,
                       "sweep_inflation.csv");
    }
    if (sweep_steps->parsed()) {
      if (grid.empty()) grid = {2, 3, 5, 8, 10};
      return cmd_sweep(ov, SuiteKind::StepSweep, grid, "sweep_steps.csv");
    }
    if (ecdf->parsed()) return cmd_beta_ecdf(ov);
    if (spin->parsed()) return cmd_spinup(ov, scales);
    if (oracle->parsed()) return cmd_oracle_check(instances, oracle_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
