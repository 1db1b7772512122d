#pragma once

#include "enkbf/experiment.hpp"

namespace enkbf {

enum class SuiteKind { InflationSweep, StepSweep, BetaEcdf, Spinup };

struct SweepRow {
  std::string param_name;
  double param_value = 0.0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double spread_mean = 0.0;
  double delta_mean = 0.0;
  long failures = 0;
};

struct SuiteResult {
  std::vector<SweepRow> rows;
  std::vector<std::pair<double, double>> ecdf;  // (beta, F(beta))
  // named per-run traces (spin-up stress test)
  std::vector<std::pair<std::string, RunOutput>> runs;
};

// InflationSweep: grid of delta values, independent runs in parallel.
// StepSweep: grid of schedule lengths. BetaEcdf: one run of the base
// config, post-spin-up beta values as an empirical CDF (grid ignored).
// Spinup: grid of noise scales (in multiples of R), 150-cycle traces for
// the configured scheme and its Euler-forward counterpart.
SuiteResult run_suite(SuiteKind kind, const ExperimentConfig& base,
                      const std::vector<double>& grid);

}  // namespace enkbf
