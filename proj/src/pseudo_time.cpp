#include "enkbf/pseudo_time.hpp"

#include <cmath>
#include <numeric>

namespace enkbf {

double StepSchedule::sum() const {
  return std::accumulate(increments.begin(), increments.end(), 0.0);
}

StepSchedule build_schedule(ScheduleKind kind, int n) {
  if (n < 1) throw std::invalid_argument("build_schedule: need n >= 1");
  StepSchedule s;
  s.increments.resize(static_cast<std::size_t>(n));
  if (kind == ScheduleKind::Uniform) {
    std::fill(s.increments.begin(), s.increments.end(), 1.0 / n);
    return s;
  }
  if (n < 4) {
    throw std::invalid_argument("build_schedule: doubling requires n >= 4");
  }
  // last three at 1/4, halve backwards, repeat the first so the sum is 1
  s.increments[static_cast<std::size_t>(n - 1)] = 0.25;
  s.increments[static_cast<std::size_t>(n - 2)] = 0.25;
  s.increments[static_cast<std::size_t>(n - 3)] = 0.25;
  for (int i = n - 4; i >= 1; --i) {
    s.increments[static_cast<std::size_t>(i)] =
        0.5 * s.increments[static_cast<std::size_t>(i + 1)];
  }
  s.increments[0] = s.increments[1];
  return s;
}

StiffnessReport beta_ratio(const Matrix& y_pert, const ObsErrorModel& r) {
  const Eigen::Index m = y_pert.cols();
  if (m < 2) throw std::invalid_argument("beta_ratio: need M >= 2");
  if (y_pert.rows() == 0) return StiffnessReport{0.0};
  if (y_pert.rows() != r.size()) {
    throw std::invalid_argument("beta_ratio: error model size mismatch");
  }
  const Matrix gram =
      y_pert.transpose() * r.inverse().asDiagonal() * y_pert;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 *
                                            (gram + gram.transpose()));
  const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  return StiffnessReport{lmax / static_cast<double>(m - 1)};
}

Matrix riccati_exact(const Matrix& p_b, const ObsOperator& h,
                     const ObsErrorModel& r, double s) {
  if (s < 0.0) throw std::invalid_argument("riccati_exact: s < 0");
  const Eigen::Index n = p_b.rows();
  const Matrix hd = h.to_dense();
  const Matrix info = hd.transpose() * r.inverse().asDiagonal() * hd;
  const Matrix sys = info * p_b * s + Matrix::Identity(n, n);
  // P^b * sys^-1 without forming the inverse: solve sys^T x = P^b.
  Matrix p = sys.transpose().partialPivLu().solve(p_b).transpose();
  return 0.5 * (p + p.transpose());
}

Vector dsi_effective_inverse(const Vector& obs_cov_diag,
                             const ObsErrorModel& r, double ds) {
  if (ds <= 0.0) throw std::invalid_argument("dsi_effective_inverse: ds <= 0");
  if (obs_cov_diag.size() != r.size()) {
    throw std::invalid_argument("dsi_effective_inverse: size mismatch");
  }
  return (ds * obs_cov_diag + r.variances).cwiseInverse();
}

Matrix dsi_effective_inverse_dense(const Matrix& obs_cov,
                                   const Matrix& r_dense, double ds) {
  if (ds <= 0.0) throw std::invalid_argument("dsi_effective_inverse: ds <= 0");
  const Matrix r_inv = r_dense.partialPivLu().inverse();
  const Vector scale =
      ((obs_cov * r_inv * ds).diagonal().array() + 1.0).inverse();
  return scale.asDiagonal() * r_inv;
}

}  // namespace enkbf
