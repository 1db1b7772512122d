#include "enkbf/localization.hpp"

#include <cmath>

namespace enkbf {

double gaspari_cohn(double d, double c) {
  if (d < 0.0 || c <= 0.0) {
    throw std::invalid_argument("gaspari_cohn: need d >= 0 and c > 0");
  }
  const double x = d / c;
  if (x >= 2.0) return 0.0;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double x4 = x3 * x;
  const double x5 = x4 * x;
  if (x <= 1.0) {
    return -0.25 * x5 + 0.5 * x4 + 0.625 * x3 - (5.0 / 3.0) * x2 + 1.0;
  }
  return x5 / 12.0 - 0.5 * x4 + 0.625 * x3 + (5.0 / 3.0) * x2 - 5.0 * x +
         4.0 - 2.0 / (3.0 * x);
}

double LocalizationConfig::taper_scale() const {
  // Gaussian-matching width: the taper with this c approximates a
  // Gaussian of standard deviation `radius` (cutoff at 2c ~ 3.65 radius).
  return radius * std::sqrt(10.0 / 3.0);
}

double LocalizationConfig::cutoff() const { return 2.0 * taper_scale(); }

Eigen::Index ring_distance(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  const Eigen::Index d = std::abs(i - j);
  return std::min(d, n - d);
}

LocalObs localize_observation_errors(Eigen::Index center,
                                     const ObservationBatch& obs,
                                     const LocalizationConfig& loc) {
  if (loc.topology != Topology::Ring) {
    throw std::invalid_argument(
        "localize_observation_errors: need a ring topology");
  }
  const double c = loc.taper_scale();
  const double cutoff = loc.cutoff();
  LocalObs out;
  std::vector<double> vars;
  for (Eigen::Index j = 0; j < obs.y.size(); ++j) {
    const auto d = static_cast<double>(
        ring_distance(center, obs.op.location_of(j), loc.ring_size));
    if (d >= cutoff) continue;
    const double w = gaspari_cohn(d, c);
    if (w <= 0.0) continue;
    out.kept.push_back(j);
    vars.push_back(obs.error.variances[j] / w);
  }
  out.variances =
      Eigen::Map<Vector>(vars.data(), static_cast<Eigen::Index>(vars.size()));
  return out;
}

Ensemble apply_fixed_inflation(const Ensemble& pert, double delta) {
  if (pert.role != EnsembleRole::Perturbation) {
    throw std::invalid_argument(
        "apply_fixed_inflation: need a perturbation ensemble");
  }
  if (delta < 0.0) {
    throw std::invalid_argument("apply_fixed_inflation: delta < 0");
  }
  return Ensemble{(1.0 + delta) * pert.members, EnsembleRole::Perturbation};
}

InflationState InflationState::uniform(Eigen::Index n, double delta0,
                                       AdaptiveInflationParams params) {
  InflationState s;
  s.delta = Vector::Constant(n, delta0);
  s.params = params;
  return s;
}

void adaptive_inflation_update(InflationState& state, Eigen::Index gridpoint,
                               const Vector& innovation,
                               const Matrix& y_pert_loc,
                               const Vector& r_loc_variances) {
  const Eigen::Index l = innovation.size();
  if (l == 0) return;
  const Eigen::Index m = y_pert_loc.cols();
  const Vector r_inv = r_loc_variances.cwiseInverse();

  double trace = 0.0;
  for (Eigen::Index i = 0; i < l; ++i) {
    trace += r_inv[i] * y_pert_loc.row(i).squaredNorm();
  }
  trace /= static_cast<double>(m - 1);
  if (trace <= 1e-300) {
    ++state.warnings;  // collapsed local ensemble
    return;
  }

  const double chisq = innovation.cwiseProduct(r_inv).dot(innovation);
  const double rho = (chisq - static_cast<double>(l)) / trace;

  const auto& p = state.params;
  const double current = (1.0 + state.delta[gridpoint]) *
                         (1.0 + state.delta[gridpoint]);
  const double blended =
      (1.0 - p.kappa) * current + p.kappa * std::max(rho, p.floor);
  double delta = std::sqrt(std::max(blended, 0.0)) - 1.0;
  delta = std::clamp(delta, p.delta_min, p.delta_max);
  state.delta[gridpoint] = delta;
}

namespace {

struct GridpointOutcome {
  double beta = 0.0;
  bool failed = false;
};

}  // namespace

SweepResult local_analysis_sweep(FilterKind kind, const Ensemble& ens_b,
                                 const ObservationBatch& obs,
                                 const LocalizationConfig& loc,
                                 const InflationState& inflation,
                                 const IntegrationScheme& scheme,
                                 MeanUpdateMode mode, bool adapt_inflation,
                                 const std::vector<Eigen::Index>* order) {
  if (loc.topology != Topology::Ring) {
    throw std::invalid_argument("local_analysis_sweep: need a ring topology");
  }
  const Eigen::Index n = ens_b.state_dim();
  if (loc.ring_size != n) {
    throw std::invalid_argument(
        "local_analysis_sweep: ring size does not match state dimension");
  }

  auto [mean, pert] = mean_and_perturbations(ens_b);
  const Matrix y_pert_raw = project_to_obs(obs.op, pert);  // uninflated
  const Vector h_mean = obs.op.apply(mean);
  const Vector innovation_full = obs.y - h_mean;

  SweepResult out;
  out.inflation = inflation;
  out.analysis.analysis =
      Ensemble{Matrix(n, ens_b.size()), EnsembleRole::Full};
  std::vector<GridpointOutcome> outcomes(static_cast<std::size_t>(n));

  std::vector<Eigen::Index> default_order;
  if (order == nullptr) {
    default_order.resize(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < n; ++q) {
      default_order[static_cast<std::size_t>(q)] = q;
    }
    order = &default_order;
  }

  for (Eigen::Index q : *order) {
    const double infl = 1.0 + inflation.delta[q];
    const Eigen::RowVectorXd pert_row = infl * pert.members.row(q);
    auto& outcome = outcomes[static_cast<std::size_t>(q)];

    const LocalObs lo = localize_observation_errors(q, obs, loc);
    const auto l_loc = static_cast<Eigen::Index>(lo.kept.size());
    if (l_loc == 0) {
      // no local information: inflated background row passes through
      out.analysis.analysis.members.row(q) =
          pert_row.array() + mean[q];
      continue;
    }

    Matrix y_loc_raw(l_loc, ens_b.size());
    Vector d_loc(l_loc);
    Vector y_obs_loc(l_loc);
    Vector h_mean_loc(l_loc);
    for (Eigen::Index i = 0; i < l_loc; ++i) {
      y_loc_raw.row(i) = y_pert_raw.row(lo.kept[static_cast<std::size_t>(i)]);
      d_loc[i] = innovation_full[lo.kept[static_cast<std::size_t>(i)]];
      y_obs_loc[i] = obs.y[lo.kept[static_cast<std::size_t>(i)]];
      h_mean_loc[i] = h_mean[lo.kept[static_cast<std::size_t>(i)]];
    }
    const ObsErrorModel r_loc(lo.variances);
    const Matrix y_loc = infl * y_loc_raw;

    WeightSolution sol;
    switch (kind) {
      case FilterKind::LETKF:
        sol = solve_letkf_weights(y_loc, d_loc, r_loc);
        break;
      case FilterKind::ETKBF:
        sol = solve_etkbf_weights(y_loc, -d_loc, r_loc, scheme, mode);
        break;
      case FilterKind::DETKBF: {
        const Matrix y_full_loc = y_loc.colwise() + h_mean_loc;
        sol = solve_detkbf_weights(y_full_loc, y_obs_loc, r_loc, scheme);
        break;
      }
      default:
        throw std::invalid_argument(
            "local_analysis_sweep: unsupported filter kind");
    }

    outcome.beta = beta_ratio(y_loc_raw, r_loc).beta;
    if (sol.failed) {
      outcome.failed = true;
      out.analysis.analysis.members.row(q) = pert_row.array() + mean[q];
    } else if (kind == FilterKind::DETKBF) {
      const Eigen::RowVectorXd full_row = pert_row.array() + mean[q];
      out.analysis.analysis.members.row(q) = full_row * sol.w;
    } else {
      const double mean_a = mean[q] + pert_row.dot(*sol.w_mean);
      out.analysis.analysis.members.row(q) =
          (pert_row * sol.w).array() + mean_a;
    }

    if (adapt_inflation) {
      adaptive_inflation_update(out.inflation, q, d_loc, y_loc_raw,
                                lo.variances);
    }
  }

  double beta_max = 0.0;
  for (Eigen::Index q = 0; q < n; ++q) {
    const auto& o = outcomes[static_cast<std::size_t>(q)];
    beta_max = std::max(beta_max, o.beta);
    if (o.failed) out.failed_gridpoints.push_back(q);
  }
  out.analysis.stiffness.beta = beta_max;
  out.analysis.steps_used = scheme.schedule.steps();
  if (!out.failed_gridpoints.empty()) {
    out.analysis.failed = true;
    out.analysis.failure_reason =
        std::to_string(out.failed_gridpoints.size()) +
        " gridpoint analyses failed";
  }
  return out;
}

}  // namespace enkbf
