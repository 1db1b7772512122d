#pragma once

#include <cstdint>

#include "enkbf/filters.hpp"

namespace enkbf {

// Independent reference routes. These deliberately avoid the code paths
// they are used to check: plain Euler time-stepping instead of the
// closed-form Riccati solve, and a direct LU inverse instead of the
// eigendecomposition used by the transform filters.

// Integrate dP/ds = -P H^T R^-1 H P from P(0) = p_b with n_steps Euler
// forward steps up to pseudo-time s.
Matrix riccati_flow_euler(const Matrix& p_b, const ObsOperator& h,
                          const ObsErrorModel& r, double s, long n_steps);

// Direct evaluation of (Y^T R^-1 Y + (M-1) I)^-1.
Matrix ensemble_space_analysis_cov(const Matrix& y_pert,
                                   const ObsErrorModel& r);

struct OracleSuiteResult {
  int passed = 0;
  int failed = 0;
  double max_rel_error = 0.0;
};

// ETKBF fine integration (2000 uniform DSI steps) against the direct
// ensemble-space analysis covariance, over seeded random instances with
// N <= 10, M <= 8, L <= 10. tol is the relative Frobenius error bound.
OracleSuiteResult run_transform_limit_suite(int instances, std::uint64_t seed,
                                            double tol = 1e-6,
                                            int dsi_steps = 2000);

// Closed-form Riccati solution against fine-step Euler integration at
// s in {0.25, 0.5, 1}.
OracleSuiteResult run_riccati_suite(int instances, std::uint64_t seed,
                                    double tol = 1e-6,
                                    long euler_steps = 200000);

// Random instance with a controlled stiffness ratio: y_pert is scaled so
// that beta equals beta_target exactly.
struct RandomInstance {
  Matrix y_pert;    // L x M, centered rows
  ObsErrorModel r;  // variances in [0.5, 2]
};

RandomInstance random_obs_instance(SeededStream& stream, Eigen::Index l,
                                   Eigen::Index m, double beta_target);

}  // namespace enkbf
