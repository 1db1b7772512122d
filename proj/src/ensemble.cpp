#include "enkbf/ensemble.hpp"

namespace enkbf {

std::pair<Vector, Ensemble> mean_and_perturbations(const Ensemble& ens) {
  if (ens.role != EnsembleRole::Full) {
    throw std::invalid_argument(
        "mean_and_perturbations: input must be a full ensemble");
  }
  if (ens.size() < 2) {
    throw std::invalid_argument("mean_and_perturbations: need M >= 2");
  }
  if (!ens.members.allFinite()) {
    throw std::invalid_argument(
        "mean_and_perturbations: non-finite ensemble entries");
  }
  Vector mean = ens.members.rowwise().mean();
  Ensemble pert{ens.members.colwise() - mean, EnsembleRole::Perturbation};
  return {std::move(mean), std::move(pert)};
}

Matrix sample_covariance(const Ensemble& pert) {
  if (pert.role != EnsembleRole::Perturbation) {
    throw std::invalid_argument(
        "sample_covariance: input must be a perturbation ensemble");
  }
  if (pert.size() < 2) {
    throw std::invalid_argument("sample_covariance: need M >= 2");
  }
  const double scale = 1.0 / static_cast<double>(pert.size() - 1);
  Matrix p = scale * (pert.members * pert.members.transpose());
  return 0.5 * (p + p.transpose());
}

Ensemble apply_weight_transform(const Ensemble& ens, const WeightMatrix& w) {
  if (ens.size() != w.size()) {
    throw std::invalid_argument(
        "apply_weight_transform: ensemble size does not match weight size");
  }
  const bool pert_pair = ens.role == EnsembleRole::Perturbation &&
                         w.role == WeightRole::PerturbationWeights;
  const bool full_pair =
      ens.role == EnsembleRole::Full && w.role == WeightRole::FullWeights;
  if (!pert_pair && !full_pair) {
    throw std::invalid_argument(
        "apply_weight_transform: ensemble role does not match weight role");
  }
  return Ensemble{ens.members * w.entries, ens.role};
}

bool is_centered(const Matrix& perturbations, double tol_scale) {
  for (Eigen::Index i = 0; i < perturbations.rows(); ++i) {
    const double tol = tol_scale * (perturbations.row(i).norm() + 1.0);
    if (std::abs(perturbations.row(i).sum()) > tol) return false;
  }
  return true;
}

bool has_unit_column_sums(const Matrix& w, double tol) {
  return ((w.colwise().sum().array() - 1.0).abs() <= tol).all();
}

bool has_unit_row_sums(const Matrix& w, double tol) {
  return ((w.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

Matrix clip_to_psd(const Matrix& sym, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()));
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("clip_to_psd: eigendecomposition failed");
  }
  const double floor = -rel_tol * std::max(sym.trace(), 1.0);
  Vector vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] < floor) {
      throw std::runtime_error(
          "clip_to_psd: matrix has a genuinely negative eigenvalue");
    }
    vals[i] = std::max(vals[i], 0.0);
  }
  return eig.eigenvectors() * vals.asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace enkbf
