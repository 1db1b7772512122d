#include "enkbf/oracles.hpp"

#include <cmath>

namespace enkbf {

Matrix riccati_flow_euler(const Matrix& p_b, const ObsOperator& h,
                          const ObsErrorModel& r, double s, long n_steps) {
  if (n_steps < 1) throw std::invalid_argument("riccati_flow_euler: steps");
  const Matrix hd = h.to_dense();
  const Matrix info = hd.transpose() * r.inverse().asDiagonal() * hd;
  const double ds = s / static_cast<double>(n_steps);
  Matrix p = p_b;
  for (long k = 0; k < n_steps; ++k) {
    p -= ds * (p * info * p);
  }
  return 0.5 * (p + p.transpose());
}

Matrix ensemble_space_analysis_cov(const Matrix& y_pert,
                                   const ObsErrorModel& r) {
  const Eigen::Index m = y_pert.cols();
  Matrix a = y_pert.transpose() * r.inverse().asDiagonal() * y_pert;
  a.diagonal().array() += static_cast<double>(m - 1);
  return a.partialPivLu().inverse();
}

RandomInstance random_obs_instance(SeededStream& stream, Eigen::Index l,
                                   Eigen::Index m, double beta_target) {
  Matrix y(l, m);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) y(i, j) = stream.normal();
  }
  y = y.colwise() - y.rowwise().mean().eval();  // perturbation rows
  Vector variances(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    variances[i] = 0.5 + 1.5 * stream.uniform();
  }
  ObsErrorModel r(variances);
  const double beta_raw = beta_ratio(y, r).beta;
  if (beta_raw > 0.0) {
    y *= std::sqrt(beta_target / beta_raw);
  }
  return RandomInstance{std::move(y), std::move(r)};
}

OracleSuiteResult run_transform_limit_suite(int instances, std::uint64_t seed,
                                            double tol, int dsi_steps) {
  OracleSuiteResult out;
  SeededStream stream(seed, StreamKind::Instance, 1);
  IntegrationScheme scheme{StepScheme::DSI,
                           build_schedule(ScheduleKind::Uniform, dsi_steps)};
  for (int i = 0; i < instances; ++i) {
    const auto l = static_cast<Eigen::Index>(1 + stream.uniform() * 10);
    const auto m = static_cast<Eigen::Index>(2 + stream.uniform() * 7);
    // First-order scheme: keep the flow mildly stiff so the fixed step
    // budget resolves it well below tol.
    const double beta = std::pow(10.0, -3.0 + 1.5 * stream.uniform());
    RandomInstance inst = random_obs_instance(stream, std::min<Eigen::Index>(l, 10),
                                              std::min<Eigen::Index>(m, 8), beta);

    const Eigen::Index mm = inst.y_pert.cols();
    WeightSolution sol = solve_etkbf_weights(
        inst.y_pert, Vector::Zero(inst.y_pert.rows()), inst.r, scheme,
        MeanUpdateMode::FinalGain);
    const Matrix p_flow =
        sol.w * sol.w.transpose() / static_cast<double>(mm - 1);
    const Matrix p_ref = ensemble_space_analysis_cov(inst.y_pert, inst.r);
    const double rel = (p_flow - p_ref).norm() / p_ref.norm();
    out.max_rel_error = std::max(out.max_rel_error, rel);
    if (!sol.failed && rel <= tol) {
      ++out.passed;
    } else {
      ++out.failed;
    }
  }
  return out;
}

OracleSuiteResult run_riccati_suite(int instances, std::uint64_t seed,
                                    double tol, long euler_steps) {
  OracleSuiteResult out;
  SeededStream stream(seed, StreamKind::Instance, 2);
  const double s_values[] = {0.25, 0.5, 1.0};
  for (int i = 0; i < instances; ++i) {
    const auto n = static_cast<Eigen::Index>(2 + stream.uniform() * 5);
    Matrix root(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) root(a, b) = stream.normal();
    }
    Matrix p_b = root * root.transpose() / static_cast<double>(n);
    ObsOperator h = ObsOperator::identity(n);
    ObsErrorModel r = ObsErrorModel::isotropic(n, 4.0);
    // moderate stiffness so the Euler oracle itself resolves the flow
    p_b *= 0.5 / std::max(p_b.trace(), 1e-12);

    bool ok = true;
    for (double s : s_values) {
      const Matrix exact = riccati_exact(p_b, h, r, s);
      const Matrix flow = riccati_flow_euler(p_b, h, r, s, euler_steps);
      const double rel = (exact - flow).norm() / exact.norm();
      out.max_rel_error = std::max(out.max_rel_error, rel);
      if (rel > tol) ok = false;
    }
    if (ok) {
      ++out.passed;
    } else {
      ++out.failed;
    }
  }
  return out;
}

}  // namespace enkbf
