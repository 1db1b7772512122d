#include "enkbf/suites.hpp"

#include <algorithm>
#include <cmath>

#include "enkbf/format.hpp"
#include "enkbf/parallel.hpp"

namespace enkbf {

namespace {

SweepRow summarize(const std::string& name, double value,
                   const RunSummary& s) {
  return SweepRow{name,          value,          s.rmse_mean, s.rmse_std,
                  s.spread_mean, s.delta_mean,   s.failures};
}

SuiteResult inflation_sweep(const ExperimentConfig& base,
                            const std::vector<double>& grid) {
  SuiteResult out;
  out.rows.resize(grid.size());
  parallel_for(static_cast<long>(grid.size()), [&](long i) {
    ExperimentConfig cfg = base;
    cfg.inflation_mode = InflationMode::Fixed;
    cfg.fixed_delta = grid[static_cast<std::size_t>(i)];
    const RunOutput run = run_twin_experiment(cfg);
    out.rows[static_cast<std::size_t>(i)] =
        summarize("delta", cfg.fixed_delta, run.summary);
  });
  return out;
}

SuiteResult step_sweep(const ExperimentConfig& base,
                       const std::vector<double>& grid) {
  SuiteResult out;
  out.rows.resize(grid.size());
  parallel_for(static_cast<long>(grid.size()), [&](long i) {
    ExperimentConfig cfg = base;
    cfg.pseudo_steps = static_cast<int>(grid[static_cast<std::size_t>(i)]);
    const RunOutput run = run_twin_experiment(cfg);
    out.rows[static_cast<std::size_t>(i)] = summarize(
        "steps", static_cast<double>(cfg.pseudo_steps), run.summary);
  });
  return out;
}

SuiteResult beta_ecdf(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.filter = FilterKind::LETKF;
  const RunOutput run = run_twin_experiment(cfg);

  std::vector<double> betas;
  for (const auto& d : run.diagnostics) {
    if (d.cycle >= cfg.spinup && !d.failed) betas.push_back(d.beta);
  }
  std::sort(betas.begin(), betas.end());

  SuiteResult out;
  out.ecdf.reserve(betas.size());
  const auto n = static_cast<double>(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    out.ecdf.emplace_back(betas[i], static_cast<double>(i + 1) / n);
  }
  out.runs.emplace_back("beta_ecdf_run", run);
  return out;
}

SuiteResult spinup(const ExperimentConfig& base,
                   const std::vector<double>& grid) {
  SuiteResult out;
  struct Job {
    double scale;
    StepScheme scheme;
  };
  std::vector<Job> jobs;
  for (double scale : grid) {
    jobs.push_back({scale, StepScheme::DSI});
    jobs.push_back({scale, StepScheme::EulerForward});
  }
  out.runs.resize(jobs.size());
  parallel_for(static_cast<long>(jobs.size()), [&](long i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    ExperimentConfig cfg = base;
    cfg.init = EnsembleInit::SteadyState;
    cfg.init_noise_scale = job.scale;
    cfg.scheme = job.scheme;
    cfg.cycles = 150;
    cfg.spinup = 0;
    cfg.abort_failure_rate = 1.1;  // observe every failure, never abort
    const std::string name =
        std::string("spinup_") +
        (job.scheme == StepScheme::DSI ? "dsi" : "euler") + "_scale" +
        to_shortest(job.scale);
    out.runs[static_cast<std::size_t>(i)] = {name,
                                             run_twin_experiment(cfg)};
  });
  return out;
}

}  // namespace

SuiteResult run_suite(SuiteKind kind, const ExperimentConfig& base,
                      const std::vector<double>& grid) {
  if (kind != SuiteKind::BetaEcdf && grid.empty()) {
    throw std::invalid_argument("run_suite: empty parameter grid");
  }
  switch (kind) {
    case SuiteKind::InflationSweep: return inflation_sweep(base, grid);
    case SuiteKind::StepSweep: return step_sweep(base, grid);
    case SuiteKind::BetaEcdf: return beta_ecdf(base);
    case SuiteKind::Spinup: return spinup(base, grid);
  }
  throw std::logic_error("run_suite: unreachable");
}

}  // namespace enkbf
