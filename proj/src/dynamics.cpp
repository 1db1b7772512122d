#include "enkbf/dynamics.hpp"

#include <cmath>

namespace enkbf {

namespace {

void check_dim(const ModelSpec& spec, const Vector& x) {
  if (x.size() != spec.state_dim()) {
    throw std::invalid_argument("tendency: state dimension mismatch");
  }
}

void tendency_into(const ModelSpec& spec, const Vector& x, Vector& dx) {
  if (spec.kind == ModelKind::Lorenz63) {
    dx[0] = spec.p * (x[1] - x[0]);
    dx[1] = x[0] * (spec.r - x[2]) - x[1];
    dx[2] = x[0] * x[1] - spec.b * x[2];
    return;
  }
  const int n = spec.n;
  for (int q = 0; q < n; ++q) {
    const int qm1 = (q - 1 + n) % n;
    const int qm2 = (q - 2 + n) % n;
    const int qp1 = (q + 1) % n;
    dx[q] = (x[qp1] - x[qm2]) * x[qm1] - x[q] + spec.forcing;
  }
}

}  // namespace

Vector tendency(const ModelSpec& spec, const Vector& x) {
  check_dim(spec, x);
  Vector dx(x.size());
  tendency_into(spec, x, dx);
  return dx;
}

Vector rk4_advance(const ModelSpec& spec, Vector x, long n_steps) {
  check_dim(spec, x);
  if (n_steps < 0) throw std::invalid_argument("rk4_advance: n_steps < 0");

  const double h = spec.dt;
  const Eigen::Index dim = x.size();
  Vector k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);

  for (long step = 0; step < n_steps; ++step) {
    tendency_into(spec, x, k1);
    stage = x + 0.5 * h * k1;
    tendency_into(spec, stage, k2);
    stage = x + 0.5 * h * k2;
    tendency_into(spec, stage, k3);
    stage = x + h * k3;
    tendency_into(spec, stage, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowupThreshold) {
      throw ModelBlowupError("rk4_advance: model state diverged at step " +
                             std::to_string(step + 1));
    }
  }
  return x;
}

Ensemble advance_ensemble(const ModelSpec& spec, const Ensemble& ens,
                          long n_steps) {
  if (ens.role != EnsembleRole::Full) {
    throw std::invalid_argument("advance_ensemble: need a full ensemble");
  }
  Ensemble out{Matrix(ens.members.rows(), ens.members.cols()),
               EnsembleRole::Full};
  for (Eigen::Index m = 0; m < ens.size(); ++m) {
    out.members.col(m) = rk4_advance(spec, ens.members.col(m), n_steps);
  }
  return out;
}

}  // namespace enkbf
