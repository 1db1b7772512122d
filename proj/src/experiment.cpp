#include "enkbf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace enkbf {

void ExperimentConfig::validate() const {
  if (ensemble_size < 2) {
    throw std::invalid_argument("config: ensemble_size must be >= 2");
  }
  if (cycles <= spinup) {
    throw std::invalid_argument("config: cycles must exceed spinup");
  }
  if (obs_interval < 1) {
    throw std::invalid_argument("config: obs_interval must be >= 1");
  }
  if (pseudo_steps < 1) {
    throw std::invalid_argument("config: steps must be >= 1");
  }
  if (schedule_kind == ScheduleKind::Doubling && pseudo_steps < 4) {
    throw std::invalid_argument(
        "config: a doubling schedule requires at least 4 steps");
  }
  if (obs_variance <= 0.0) {
    throw std::invalid_argument("config: obs variance must be positive");
  }
  if (inflation_mode == InflationMode::Adaptive && !localize) {
    throw std::invalid_argument(
        "config: adaptive inflation requires localization");
  }
  if (init == EnsembleInit::SteadyState &&
      model.kind != ModelKind::Lorenz96) {
    throw std::invalid_argument(
        "config: steady-state init is defined for the 40-variable model");
  }
  if (localize && model.state_dim() < 4) {
    throw std::invalid_argument("config: localization needs a ring model");
  }
  if (filter == FilterKind::KFReference) {
    throw std::invalid_argument(
        "config: the direct KF is an oracle, not a cycling filter");
  }
}

ObsOperator ExperimentConfig::make_operator() const {
  const Eigen::Index n = model.state_dim();
  if (observe_all) return ObsOperator::identity(n);
  return ObsOperator::every_other(n, obs_parity);
}

ObsErrorModel ExperimentConfig::make_error_model() const {
  return ObsErrorModel::isotropic(make_operator().rows(), obs_variance);
}

IntegrationScheme ExperimentConfig::make_scheme() const {
  return IntegrationScheme{scheme,
                           build_schedule(schedule_kind, pseudo_steps)};
}

std::pair<double, double> compute_diagnostics(const Ensemble& analysis,
                                              const Vector& truth) {
  if (analysis.state_dim() != truth.size()) {
    throw std::invalid_argument("compute_diagnostics: dimension mismatch");
  }
  const Vector mean = analysis.members.rowwise().mean();
  const double rmse = std::sqrt((mean - truth).squaredNorm() /
                                static_cast<double>(truth.size()));
  const Matrix pert = analysis.members.colwise() - mean;
  const double mm1 = static_cast<double>(analysis.size() - 1);
  const double spread = std::sqrt(pert.squaredNorm() / mm1 /
                                  static_cast<double>(truth.size()));
  return {rmse, spread};
}

namespace {

Vector initial_truth(const ExperimentConfig& cfg, SeededStream& nature) {
  const Eigen::Index n = cfg.model.state_dim();
  Vector x(n);
  if (cfg.model.kind == ModelKind::Lorenz63) {
    x << 1.0, 1.0, 1.0;
  } else {
    x.setConstant(cfg.model.forcing);
  }
  x += 0.1 * nature.normal_vector(n);
  // settle onto the attractor before cycling starts
  const long settle = std::lround(10.0 / cfg.model.dt);
  return rk4_advance(cfg.model, x, settle);
}

Ensemble initial_ensemble(const ExperimentConfig& cfg, const Vector& truth,
                          SeededStream& stream) {
  const Eigen::Index n = cfg.model.state_dim();
  Vector center;
  double sigma = 1.0;
  switch (cfg.init) {
    case EnsembleInit::ObsNoise:
      center = truth;
      sigma = std::sqrt(cfg.obs_variance);
      break;
    case EnsembleInit::UnitNoise:
      center = truth;
      sigma = 1.0;
      break;
    case EnsembleInit::SteadyState:
      center = Vector::Constant(n, cfg.model.forcing);
      sigma = std::sqrt(cfg.init_noise_scale * cfg.obs_variance);
      break;
  }
  Ensemble ens{Matrix(n, cfg.ensemble_size), EnsembleRole::Full};
  for (int m = 0; m < cfg.ensemble_size; ++m) {
    ens.members.col(m) = center + sigma * stream.normal_vector(n);
  }
  return ens;
}

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double std_dev() const {
    return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  }
};

}  // namespace

RunOutput run_twin_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const ObsOperator h = cfg.make_operator();
  const ObsErrorModel r = cfg.make_error_model();
  const IntegrationScheme scheme = cfg.make_scheme();
  const Eigen::Index n = cfg.model.state_dim();

  SeededStream nature_stream(cfg.seed, StreamKind::NatureInit);
  SeededStream obs_stream(cfg.seed, StreamKind::ObsNoise);
  SeededStream ens_stream(cfg.seed, StreamKind::EnsembleInit);

  Vector truth = initial_truth(cfg, nature_stream);
  Ensemble ens = initial_ensemble(cfg, truth, ens_stream);

  LocalizationConfig loc{cfg.localization_radius, Topology::Ring, n};
  InflationState inflation = InflationState::uniform(
      n, cfg.fixed_delta, cfg.adaptive);
  const bool adapt = cfg.inflation_mode == InflationMode::Adaptive;

  RunOutput out;
  out.diagnostics.reserve(static_cast<std::size_t>(cfg.cycles));
  Welford rmse_acc, spread_acc, rmse_b_acc, delta_acc;
  long failures = 0;

  for (long cycle = 0; cycle < cfg.cycles; ++cycle) {
    CycleDiagnostics diag;
    diag.cycle = cycle;

    try {
      truth = rk4_advance(cfg.model, truth, cfg.obs_interval);
      ens = advance_ensemble(cfg.model, ens, cfg.obs_interval);
    } catch (const ModelBlowupError& e) {
      diag.failed = true;
      diag.rmse_a = diag.rmse_b = diag.spread =
          std::numeric_limits<double>::quiet_NaN();
      out.diagnostics.push_back(diag);
      ++failures;
      out.summary.aborted = true;
      out.summary.abort_reason = e.what();
      break;
    }

    const ObservationBatch obs =
        synthesize_observations(truth, h, r, obs_stream, cycle);

    {
      const Vector mean_b = ens.members.rowwise().mean();
      diag.rmse_b = std::sqrt((mean_b - truth).squaredNorm() /
                              static_cast<double>(n));
    }

    AnalysisResult analysis;
    if (cfg.localize) {
      SweepResult sweep =
          local_analysis_sweep(cfg.filter, ens, obs, loc, inflation, scheme,
                               cfg.mean_mode, adapt);
      analysis = std::move(sweep.analysis);
      inflation = std::move(sweep.inflation);
    } else if (cfg.filter == FilterKind::LETKF) {
      analysis = letkf_analysis(ens, obs, cfg.fixed_delta);
    } else {
      analysis = run_kbf_analysis(cfg.filter, ens, obs, scheme,
                                  cfg.mean_mode, cfg.fixed_delta);
    }

    diag.failed = analysis.failed;
    diag.beta = analysis.stiffness.beta;
    diag.delta_mean = adapt ? inflation.mean_delta() : cfg.fixed_delta;
    auto [rmse_a, spread] = compute_diagnostics(analysis.analysis, truth);
    diag.rmse_a = rmse_a;
    diag.spread = spread;
    out.diagnostics.push_back(diag);

    if (cfg.dump_inflation_fields && adapt) {
      for (Eigen::Index q = 0; q < n; ++q) {
        out.inflation_fields.emplace_back(cycle, static_cast<int>(q),
                                          inflation.delta[q]);
      }
    }

    if (diag.failed) {
      ++failures;
    } else if (cycle >= cfg.spinup) {
      rmse_acc.add(diag.rmse_a);
      spread_acc.add(diag.spread);
      rmse_b_acc.add(diag.rmse_b);
      delta_acc.add(diag.delta_mean);
    }

    ens = std::move(analysis.analysis);

    if (cycle >= 100 &&
        static_cast<double>(failures) / static_cast<double>(cycle + 1) >
            cfg.abort_failure_rate) {
      out.summary.aborted = true;
      out.summary.abort_reason =
          "failure rate exceeded " + std::to_string(cfg.abort_failure_rate);
      break;
    }
  }

  out.summary.rmse_mean = rmse_acc.mean;
  out.summary.rmse_std = rmse_acc.std_dev();
  out.summary.rmse_b_mean = rmse_b_acc.mean;
  out.summary.spread_mean = spread_acc.mean;
  out.summary.spread_std = spread_acc.std_dev();
  out.summary.delta_mean = delta_acc.mean;
  out.summary.failures = failures;
  out.summary.cycles_used = rmse_acc.n;
  out.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "letkf") return FilterKind::LETKF;
  if (name == "etkbf") return FilterKind::ETKBF;
  if (name == "detkbf") return FilterKind::DETKBF;
  if (name == "bgr09") return FilterKind::BGR09State;
  if (name == "br10") return FilterKind::BR10State;
  if (name == "kf") return FilterKind::KFReference;
  throw std::invalid_argument("unknown filter kind: " + name);
}

StepScheme parse_step_scheme(const std::string& name) {
  if (name == "euler") return StepScheme::EulerForward;
  if (name == "dsi") return StepScheme::DSI;
  throw std::invalid_argument("unknown scheme: " + name);
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "uniform") return ScheduleKind::Uniform;
  if (name == "doubling") return ScheduleKind::Doubling;
  throw std::invalid_argument("unknown schedule: " + name);
}

MeanUpdateMode parse_mean_mode(const std::string& name) {
  if (name == "per_step") return MeanUpdateMode::PerStep;
  if (name == "final_gain") return MeanUpdateMode::FinalGain;
  throw std::invalid_argument("unknown mean mode: " + name);
}

}  // namespace enkbf
