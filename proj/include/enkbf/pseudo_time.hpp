#pragma once

#include <vector>

#include "enkbf/obs.hpp"

namespace enkbf {

enum class ScheduleKind { Uniform, Doubling };

// Ordered positive pseudo-time increments that sum to exactly 1.
struct StepSchedule {
  std::vector<double> increments;

  int steps() const { return static_cast<int>(increments.size()); }
  double sum() const;
};

// Uniform: n equal steps. Doubling (n >= 4): the last three steps are
// 1/4, each earlier step is half its successor, and the first step is
// repeated so the total is exactly 1. Doubling with n < 4 throws.
StepSchedule build_schedule(ScheduleKind kind, int n);

// Stiffness ratio of one analysis: beta = ||Y^T R^-1 Y||_2 / (M-1),
// computed as the largest eigenvalue of the M x M Gram matrix.
struct StiffnessReport {
  double beta = 0.0;
};

StiffnessReport beta_ratio(const Matrix& y_pert, const ObsErrorModel& r);

// Analytic covariance at pseudo-time s: P(s) = P^b (H^T R^-1 H P^b s + I)^-1,
// solved as a linear system and symmetrized. s in [0,1], P^b symmetric PSD.
Matrix riccati_exact(const Matrix& p_b, const ObsOperator& h,
                     const ObsErrorModel& r, double s);

// Entrywise (ds * D + R)^-1 for a diagonal obs-space covariance diagonal D.
// ds -> 0 recovers R^-1.
Vector dsi_effective_inverse(const Vector& obs_cov_diag,
                             const ObsErrorModel& r, double ds);

// Non-diagonal-R variant: (diag(HPH^T R^-1 ds + I))^-1 R^-1 as a dense
// L x L kernel.
Matrix dsi_effective_inverse_dense(const Matrix& obs_cov,
                                   const Matrix& r_dense, double ds);

}  // namespace enkbf
