#pragma once

#include <vector>

#include "enkbf/filters.hpp"

namespace enkbf {

// Gaspari-Cohn compactly supported piecewise quintic; weight 1 at d = 0,
// 0 from d = 2c outwards.
double gaspari_cohn(double d, double c);

enum class Topology { None, Ring };

struct LocalizationConfig {
  double radius = 4.0;  // lambda, in gridpoint-distance units
  Topology topology = Topology::Ring;
  Eigen::Index ring_size = 40;

  double taper_scale() const;  // c = lambda * sqrt(10/3)
  double cutoff() const;       // 2c
};

// d(i,j) = min(|i-j|, N-|i-j|) on the ring.
Eigen::Index ring_distance(Eigen::Index i, Eigen::Index j, Eigen::Index n);

// Observations within the cutoff of the center gridpoint, with variances
// divided by the taper weight. Weight-zero observations are dropped.
struct LocalObs {
  std::vector<Eigen::Index> kept;  // indices into the batch
  Vector variances;                // tapered
};

LocalObs localize_observation_errors(Eigen::Index center,
                                     const ObservationBatch& obs,
                                     const LocalizationConfig& loc);

// X -> (1 + delta) X on perturbations; the mean is untouched by design.
Ensemble apply_fixed_inflation(const Ensemble& pert, double delta);

struct AdaptiveInflationParams {
  double kappa = 0.03;      // smoothing gain on (1+delta)^2
  double floor = 1.0;       // lower bound for the (1+delta)^2 estimate
  double delta_min = 0.0;
  double delta_max = 1.0;
};

struct InflationState {
  Vector delta;  // per-gridpoint multiplicative factor
  AdaptiveInflationParams params;
  long warnings = 0;  // collapsed-ensemble skips

  static InflationState uniform(Eigen::Index n, double delta0,
                                AdaptiveInflationParams params = {});
  double mean_delta() const { return delta.size() ? delta.mean() : 0.0; }
};

// Innovation-statistics update of one gridpoint's factor: the
// instantaneous estimate rho = (d^T R^-1 d - L) / tr(Y^T R^-1 Y/(M-1))
// targets (1+delta)^2 and is blended with gain kappa. y_pert_loc must be
// the uninflated local obs-space perturbations.
void adaptive_inflation_update(InflationState& state, Eigen::Index gridpoint,
                               const Vector& innovation,
                               const Matrix& y_pert_loc,
                               const Vector& r_loc_variances);

// Per-gridpoint R-localized analysis. Each gridpoint selects and tapers
// its observations, inflates its local perturbations by its own delta,
// solves the chosen filter in ensemble space and writes back only its
// own row; deltas update adaptively when requested. Gridpoints are
// independent, so results do not depend on processing order.
struct SweepResult {
  AnalysisResult analysis;  // beta = max over gridpoints
  InflationState inflation;
  std::vector<Eigen::Index> failed_gridpoints;
};

SweepResult local_analysis_sweep(FilterKind kind, const Ensemble& ens_b,
                                 const ObservationBatch& obs,
                                 const LocalizationConfig& loc,
                                 const InflationState& inflation,
                                 const IntegrationScheme& scheme,
                                 MeanUpdateMode mode, bool adapt_inflation,
                                 const std::vector<Eigen::Index>* order =
                                     nullptr);

}  // namespace enkbf
