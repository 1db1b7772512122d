#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enkbf/dynamics.hpp"
#include "enkbf/localization.hpp"

namespace enkbf {

enum class InflationMode { Fixed, Adaptive };

// How the initial ensemble is drawn around the initial truth:
//   ObsNoise     truth + noise with the observation-error variance
//   UnitNoise    truth + N(0, I)
//   SteadyState  model steady state + noise at init_noise_scale * R
enum class EnsembleInit { ObsNoise, UnitNoise, SteadyState };

struct ExperimentConfig {
  ModelSpec model = ModelSpec::lorenz63();
  int obs_interval = 8;  // model steps per assimilation cycle

  // observations
  bool observe_all = true;  // identity operator; else every other gridpoint
  int obs_parity = 0;
  double obs_variance = 2.0;

  // filter
  int ensemble_size = 3;
  FilterKind filter = FilterKind::LETKF;
  StepScheme scheme = StepScheme::DSI;
  ScheduleKind schedule_kind = ScheduleKind::Uniform;
  int pseudo_steps = 5;
  MeanUpdateMode mean_mode = MeanUpdateMode::PerStep;

  // localization (off for the 3-variable model)
  bool localize = false;
  double localization_radius = 4.0;

  // inflation
  InflationMode inflation_mode = InflationMode::Fixed;
  double fixed_delta = 0.0;
  AdaptiveInflationParams adaptive;

  // run
  long cycles = 20000;
  long spinup = 1000;
  std::uint64_t seed = 1;
  EnsembleInit init = EnsembleInit::ObsNoise;
  double init_noise_scale = 1.0;
  double abort_failure_rate = 0.05;
  std::string out_dir = "out";
  bool dump_inflation_fields = false;

  void validate() const;
  ObsOperator make_operator() const;
  ObsErrorModel make_error_model() const;
  IntegrationScheme make_scheme() const;
};

struct CycleDiagnostics {
  long cycle = 0;
  double rmse_a = 0.0;
  double rmse_b = 0.0;
  double spread = 0.0;
  double beta = 0.0;
  double delta_mean = 0.0;
  bool failed = false;
};

struct RunSummary {
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double rmse_b_mean = 0.0;
  double spread_mean = 0.0;
  double spread_std = 0.0;
  double delta_mean = 0.0;
  long failures = 0;      // over all cycles
  long cycles_used = 0;   // non-failed post-spin-up cycles in the means
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct RunOutput {
  RunSummary summary;
  std::vector<CycleDiagnostics> diagnostics;
  // (cycle, gridpoint, delta) triples, only when dump_inflation_fields
  std::vector<std::tuple<long, int, double>> inflation_fields;
};

// rmse of the ensemble mean against truth; spread = sqrt(mean of the
// per-variable sample variances).
std::pair<double, double> compute_diagnostics(const Ensemble& analysis,
                                              const Vector& truth);

RunOutput run_twin_experiment(const ExperimentConfig& cfg);

// Parsing helpers shared by config and CLI.
FilterKind parse_filter_kind(const std::string& name);
StepScheme parse_step_scheme(const std::string& name);
ScheduleKind parse_schedule_kind(const std::string& name);
MeanUpdateMode parse_mean_mode(const std::string& name);

}  // namespace enkbf
