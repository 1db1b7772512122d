#include "enkbf/filters.hpp"

#include <cmath>

namespace enkbf {

namespace {

// Kernel of one perturbation pseudo-time step: R^-1 for Euler forward,
// the diagonally stabilized (ds*D + R)^-1 for DSI.
Vector step_kernel(StepScheme scheme, const Vector& obs_cov_diag,
                   const ObsErrorModel& r, double ds) {
  if (scheme == StepScheme::EulerForward) return r.inverse();
  return dsi_effective_inverse(obs_cov_diag, r, ds);
}

// Mean updates under DSI use the full obs-space kernel
// (ds*HPH^T + R)^-1 v, the exact assimilation of the observation with
// error R/ds over one increment; Euler forward keeps R^-1 v.
Vector apply_mean_kernel(StepScheme scheme, const Matrix& obs_cov,
                         const ObsErrorModel& r, double ds,
                         const Vector& v) {
  if (v.size() == 0) return v;
  if (scheme == StepScheme::EulerForward) {
    return r.inverse().cwiseProduct(v);
  }
  Matrix s = ds * obs_cov;
  s += Matrix(r.variances.asDiagonal());
  return s.llt().solve(v);
}

Matrix assemble_full(const Vector& mean, const Matrix& pert) {
  return pert.colwise() + mean;
}

}  // namespace

const char* filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::LETKF: return "letkf";
    case FilterKind::ETKBF: return "etkbf";
    case FilterKind::DETKBF: return "detkbf";
    case FilterKind::BGR09State: return "bgr09";
    case FilterKind::BR10State: return "br10";
    case FilterKind::KFReference: return "kf";
  }
  return "unknown";
}

KFAnalysis kf_reference_analysis(const Vector& x_b, const Matrix& p_b,
                                 const ObservationBatch& obs) {
  const Eigen::Index n = x_b.size();
  const Matrix h = obs.op.to_dense();
  const Matrix hp = h * p_b;  // L x N
  Matrix s = hp * h.transpose();
  s += Matrix(obs.error.variances.asDiagonal());
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "kf_reference_analysis: singular innovation covariance");
  }
  const Matrix k = llt.solve(hp).transpose();  // N x L
  Matrix p_a = (Matrix::Identity(n, n) - k * h) * p_b;
  p_a = 0.5 * (p_a + p_a.transpose());
  Vector x_a = x_b - k * (h * x_b - obs.y);
  return KFAnalysis{std::move(x_a), std::move(p_a)};
}

Matrix kf_covariance_information_form(const Matrix& p_b, const ObsOperator& h,
                                      const ObsErrorModel& r) {
  const Eigen::Index n = p_b.rows();
  const Matrix hd = h.to_dense();
  const Matrix info = p_b.partialPivLu().solve(Matrix::Identity(n, n)) +
                      hd.transpose() * r.inverse().asDiagonal() * hd;
  Matrix p_a = info.partialPivLu().solve(Matrix::Identity(n, n));
  return 0.5 * (p_a + p_a.transpose());
}

WeightSolution solve_letkf_weights(const Matrix& y_pert,
                                   const Vector& innovation,
                                   const ObsErrorModel& r) {
  const Eigen::Index m = y_pert.cols();
  const double mm1 = static_cast<double>(m - 1);
  WeightSolution sol;
  sol.steps_used = 1;

  const Vector r_inv = r.inverse();
  Matrix a = y_pert.transpose() * r_inv.asDiagonal() * y_pert;
  a.diagonal().array() += mm1;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) {
    sol.failed = true;
    sol.failure_reason = "letkf: eigendecomposition failed";
    sol.w = Matrix::Identity(m, m);
    sol.w_mean = Vector::Zero(m);
    return sol;
  }
  const Vector& lam = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  sol.stiffness.beta = std::max(lam.maxCoeff() - mm1, 0.0) / mm1;

  const Matrix ptilde_a =
      v * lam.cwiseInverse().asDiagonal() * v.transpose();
  sol.w = std::sqrt(mm1) *
          (v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose());
  sol.w_mean =
      ptilde_a * (y_pert.transpose() * (r_inv.asDiagonal() * innovation));
  return sol;
}

bool etkbf_step(EtkbfState& state, const Matrix& y_pert,
                const Vector& innovation_base, const ObsErrorModel& r,
                double ds, StepScheme scheme, MeanUpdateMode mode) {
  const Eigen::Index m = state.w.rows();
  const double mm1 = static_cast<double>(m - 1);

  const Matrix ptilde = (state.w * state.w.transpose()) / mm1;
  const Matrix t = y_pert * ptilde;            // L x M
  const Matrix obs_cov = t * y_pert.transpose();  // L x L
  const Vector kern =
      step_kernel(scheme, obs_cov.diagonal(), r, ds);

  if (mode == MeanUpdateMode::PerStep) {
    const Vector rhs = apply_mean_kernel(
        scheme, obs_cov, r, ds, innovation_base + y_pert * state.w_mean);
    state.w_mean -= ds * (t.transpose() * rhs);
  }
  state.w -=
      (0.5 * ds) * (t.transpose() * (kern.asDiagonal() * (y_pert * state.w)));

  return state.w.allFinite() &&
         (mode != MeanUpdateMode::PerStep || state.w_mean.allFinite());
}

bool detkbf_step(Matrix& w_full, const Matrix& y_full, const Vector& y_obs,
                 const ObsErrorModel& r, double ds, StepScheme scheme) {
  const Eigen::Index m = w_full.rows();
  const double mm1 = static_cast<double>(m - 1);

  // centered weights give the perturbation covariance in ensemble space
  const Matrix wc = w_full.colwise() - w_full.rowwise().mean().eval();
  const Matrix ptilde = (wc * wc.transpose()) / mm1;
  const Matrix t = y_full * ptilde;            // L x M
  const Matrix obs_cov = t * y_full.transpose();  // L x L
  const Vector kern = step_kernel(scheme, obs_cov.diagonal(), r, ds);

  // split the bracket Y W (I+U) - 2 y 1^T into its centered part and the
  // mean innovation; the mean part takes the exact partial-update kernel
  const Matrix b = y_full * w_full;  // L x M
  const Vector b_mean = b.rowwise().mean();
  const Matrix b_centered = b.colwise() - b_mean;
  const Vector mean_term =
      apply_mean_kernel(scheme, obs_cov, r, ds, b_mean - y_obs);

  Matrix rhs = (0.5 * ds) * (kern.asDiagonal() * b_centered);
  rhs.colwise() += ds * mean_term;
  w_full.noalias() -= t.transpose() * rhs;
  return w_full.allFinite();
}

bool state_space_step(StateFlow& state, const ObservationBatch& obs,
                      double ds, StepScheme scheme, FilterKind kind) {
  const Eigen::Index m = state.ens.size();
  const double mm1 = static_cast<double>(m - 1);

  if (kind == FilterKind::BGR09State) {
    if (state.ens.role != EnsembleRole::Perturbation) {
      throw std::invalid_argument(
          "state_space_step: BGR09 needs a perturbation ensemble");
    }
    const Matrix& x = state.ens.members;
    const Matrix y = obs.op.apply(x);            // L x M
    const Matrix obs_cov = (y * y.transpose()) / mm1;  // L x L
    const Vector kern = step_kernel(scheme, obs_cov.diagonal(), obs.error,
                                    ds);
    const Matrix ph_t = (x * y.transpose()) / mm1;  // N x L

    const Vector dmean =
        ph_t * apply_mean_kernel(scheme, obs_cov, obs.error, ds,
                                 obs.op.apply(state.mean) - obs.y);
    const Matrix dx = ph_t * (kern.asDiagonal() * y);  // N x M
    state.mean -= ds * dmean;
    state.ens.members -= (0.5 * ds) * dx;
    return state.ens.members.allFinite() && state.mean.allFinite();
  }

  if (kind != FilterKind::BR10State) {
    throw std::invalid_argument("state_space_step: unsupported kind");
  }
  if (state.ens.role != EnsembleRole::Full) {
    throw std::invalid_argument("state_space_step: BR10 needs a full ensemble");
  }
  const Matrix& xbar = state.ens.members;
  const Matrix xc = xbar.colwise() - xbar.rowwise().mean().eval();
  const Matrix y = obs.op.apply(xbar);
  const Vector y_mean = y.rowwise().mean();
  const Matrix yc = y.colwise() - y_mean;
  const Matrix obs_cov = (yc * yc.transpose()) / mm1;
  const Vector kern = step_kernel(scheme, obs_cov.diagonal(), obs.error, ds);
  const Matrix ph_t = (xc * yc.transpose()) / mm1;  // N x L

  const Vector mean_term =
      apply_mean_kernel(scheme, obs_cov, obs.error, ds, y_mean - obs.y);
  Matrix rhs = (0.5 * ds) * (kern.asDiagonal() * yc);
  rhs.colwise() += ds * mean_term;
  state.ens.members.noalias() -= ph_t * rhs;
  return state.ens.members.allFinite();
}

WeightSolution solve_etkbf_weights(const Matrix& y_pert,
                                   const Vector& innovation_base,
                                   const ObsErrorModel& r,
                                   const IntegrationScheme& scheme,
                                   MeanUpdateMode mode) {
  const Eigen::Index m = y_pert.cols();
  const double mm1 = static_cast<double>(m - 1);
  WeightSolution sol;

  EtkbfState state{Matrix::Identity(m, m), Vector::Zero(m)};
  int k = 0;
  for (double ds : scheme.schedule.increments) {
    if (!etkbf_step(state, y_pert, innovation_base, r, ds, scheme.scheme,
                    mode)) {
      sol.failed = true;
      sol.failed_at_step = k;
      sol.failure_reason = "etkbf: non-finite weights at pseudo-step " +
                           std::to_string(k);
      break;
    }
    ++k;
  }
  sol.steps_used = k;
  sol.w = std::move(state.w);
  if (sol.failed) {
    sol.w_mean = Vector::Zero(m);
    return sol;
  }
  if (mode == MeanUpdateMode::FinalGain) {
    // Kalman gain built from the analysis covariance: K = P^a H^T R^-1
    sol.w_mean = -(sol.w * sol.w.transpose() / mm1) *
                 (y_pert.transpose() *
                  (r.inverse().asDiagonal() * innovation_base));
  } else {
    sol.w_mean = std::move(state.w_mean);
  }
  return sol;
}

WeightSolution solve_detkbf_weights(const Matrix& y_full, const Vector& y_obs,
                                    const ObsErrorModel& r,
                                    const IntegrationScheme& scheme) {
  const Eigen::Index m = y_full.cols();
  WeightSolution sol;

  Matrix w = Matrix::Identity(m, m);
  int k = 0;
  for (double ds : scheme.schedule.increments) {
    if (!detkbf_step(w, y_full, y_obs, r, ds, scheme.scheme)) {
      sol.failed = true;
      sol.failed_at_step = k;
      sol.failure_reason = "detkbf: non-finite weights at pseudo-step " +
                           std::to_string(k);
      break;
    }
    ++k;
  }
  sol.steps_used = k;
  sol.w = std::move(w);
  return sol;
}

AnalysisResult letkf_analysis(const Ensemble& ens_b,
                              const ObservationBatch& obs, double inflation) {
  auto [mean, pert] = mean_and_perturbations(ens_b);
  const Matrix y_raw = project_to_obs(obs.op, pert);
  pert.members *= (1.0 + inflation);

  const Matrix y = (1.0 + inflation) * y_raw;
  const Vector innovation = obs.y - obs.op.apply(mean);
  WeightSolution sol = solve_letkf_weights(y, innovation, obs.error);

  AnalysisResult res;
  // diagnosed stiffness is a property of the forecast, not of inflation
  res.stiffness = beta_ratio(y_raw, obs.error);
  res.steps_used = sol.steps_used;
  res.failed = sol.failed;
  res.failed_at_step = sol.failed_at_step;
  res.failure_reason = sol.failure_reason;
  if (sol.failed) {
    res.analysis = Ensemble{assemble_full(mean, pert.members),
                            EnsembleRole::Full};
    return res;
  }
  const Vector mean_a = mean + pert.members * (*sol.w_mean);
  res.analysis = Ensemble{assemble_full(mean_a, pert.members * sol.w),
                          EnsembleRole::Full};
  res.weights = WeightMatrix{sol.w, WeightRole::PerturbationWeights};
  res.mean_weights = sol.w_mean;
  return res;
}

AnalysisResult run_kbf_analysis(FilterKind kind, const Ensemble& ens_b,
                                const ObservationBatch& obs,
                                const IntegrationScheme& scheme,
                                MeanUpdateMode mode, double inflation) {
  auto [mean, pert] = mean_and_perturbations(ens_b);
  const Matrix y_raw = project_to_obs(obs.op, pert);
  pert.members *= (1.0 + inflation);

  const Eigen::Index m = ens_b.size();
  const double mm1 = static_cast<double>(m - 1);
  const Matrix y_pert = (1.0 + inflation) * y_raw;
  const Vector h_mean = obs.op.apply(mean);
  const Vector innovation_base = h_mean - obs.y;
  const StiffnessReport forecast_stiffness = beta_ratio(y_raw, obs.error);

  AnalysisResult res;

  auto background_fallback = [&](const WeightSolution& sol) {
    res.failed = true;
    res.failed_at_step = sol.failed_at_step;
    res.failure_reason = sol.failure_reason;
    res.analysis =
        Ensemble{assemble_full(mean, pert.members), EnsembleRole::Full};
  };

  switch (kind) {
    case FilterKind::ETKBF: {
      WeightSolution sol =
          solve_etkbf_weights(y_pert, innovation_base, obs.error, scheme,
                              mode);
      res.stiffness = forecast_stiffness;
      res.steps_used = sol.steps_used;
      if (sol.failed) {
        background_fallback(sol);
        return res;
      }
      const Vector mean_a = mean + pert.members * (*sol.w_mean);
      res.analysis = Ensemble{assemble_full(mean_a, pert.members * sol.w),
                              EnsembleRole::Full};
      res.weights = WeightMatrix{sol.w, WeightRole::PerturbationWeights};
      res.mean_weights = sol.w_mean;
      return res;
    }
    case FilterKind::DETKBF: {
      const Matrix y_full = y_pert.colwise() + h_mean;
      WeightSolution sol =
          solve_detkbf_weights(y_full, obs.y, obs.error, scheme);
      res.stiffness = forecast_stiffness;
      res.steps_used = sol.steps_used;
      if (sol.failed) {
        background_fallback(sol);
        return res;
      }
      res.analysis =
          Ensemble{assemble_full(mean, pert.members) * sol.w,
                   EnsembleRole::Full};
      res.weights = WeightMatrix{sol.w, WeightRole::FullWeights};
      return res;
    }
    case FilterKind::BGR09State: {
      res.stiffness = forecast_stiffness;
      StateFlow flow{Ensemble{pert.members, EnsembleRole::Perturbation},
                     mean};
      int k = 0;
      bool ok = true;
      for (double ds : scheme.schedule.increments) {
        if (!state_space_step(flow, obs, ds, scheme.scheme, kind)) {
          ok = false;
          break;
        }
        ++k;
      }
      res.steps_used = k;
      if (!ok) {
        WeightSolution fake;
        fake.failed_at_step = k;
        fake.failure_reason =
            "bgr09: non-finite state at pseudo-step " + std::to_string(k);
        background_fallback(fake);
        return res;
      }
      Vector mean_a = flow.mean;
      if (mode == MeanUpdateMode::FinalGain) {
        const Matrix y_a = obs.op.apply(flow.ens.members);
        mean_a = mean - (flow.ens.members * y_a.transpose() / mm1) *
                            (obs.error.inverse().asDiagonal() *
                             innovation_base);
      }
      res.analysis = Ensemble{assemble_full(mean_a, flow.ens.members),
                              EnsembleRole::Full};
      return res;
    }
    case FilterKind::BR10State: {
      res.stiffness = forecast_stiffness;
      StateFlow flow{
          Ensemble{assemble_full(mean, pert.members), EnsembleRole::Full},
          mean};
      int k = 0;
      bool ok = true;
      for (double ds : scheme.schedule.increments) {
        if (!state_space_step(flow, obs, ds, scheme.scheme, kind)) {
          ok = false;
          break;
        }
        ++k;
      }
      res.steps_used = k;
      if (!ok) {
        WeightSolution fake;
        fake.failed_at_step = k;
        fake.failure_reason =
            "br10: non-finite state at pseudo-step " + std::to_string(k);
        background_fallback(fake);
        return res;
      }
      res.analysis = flow.ens;
      return res;
    }
    default:
      throw std::invalid_argument(
          "run_kbf_analysis: kind must be a pseudo-time filter");
  }
}

}  // namespace enkbf
