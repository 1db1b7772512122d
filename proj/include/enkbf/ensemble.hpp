#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace enkbf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Columns are ensemble members. A Full ensemble holds raw states; a
// Perturbation ensemble holds states with the column-mean removed, so
// every row sums to zero.
enum class EnsembleRole { Full, Perturbation };

struct Ensemble {
  Matrix members;  // N x M, column-major, one member per column
  EnsembleRole role = EnsembleRole::Full;

  Eigen::Index state_dim() const { return members.rows(); }
  Eigen::Index size() const { return members.cols(); }
};

// M x M weight matrix acting on the right of an ensemble.
// PerturbationWeights (W) map X^b -> X^a and keep column sums at 1;
// FullWeights (Wbar) map the full ensemble Xbar^b -> Xbar^a.
enum class WeightRole { PerturbationWeights, FullWeights };

struct WeightMatrix {
  Matrix entries;  // M x M
  WeightRole role = WeightRole::PerturbationWeights;

  Eigen::Index size() const { return entries.rows(); }
};

// Rank-one mean projector U = 11^T / M, applied as an operator on the
// column index of an N x M matrix (never materialized in library code).
struct MeanProjector {
  Eigen::Index ensemble_size;

  // A * U : every column becomes the column average.
  Matrix apply(const Matrix& a) const {
    Vector mean = a.rowwise().mean();
    return mean.replicate(1, a.cols());
  }
  // A * (I - U) : subtract the column average from every column.
  Matrix apply_complement(const Matrix& a) const {
    return a.colwise() - a.rowwise().mean().eval();
  }
  // Dense M x M form, for tests on tiny ensembles.
  Matrix dense() const {
    return Matrix::Constant(ensemble_size, ensemble_size,
                            1.0 / static_cast<double>(ensemble_size));
  }
};

// Splits a full ensemble into its mean and centered perturbations.
// Throws std::invalid_argument on role mismatch or non-finite entries.
std::pair<Vector, Ensemble> mean_and_perturbations(const Ensemble& ens);

// P = X X^T / (M - 1) for a perturbation ensemble.
Matrix sample_covariance(const Ensemble& pert);

// result = ens * w. Perturbation weights pair with perturbation
// ensembles, full weights with full ensembles; anything else throws.
Ensemble apply_weight_transform(const Ensemble& ens, const WeightMatrix& w);

// Row sums within 1e-10 * (row norm + 1)?
bool is_centered(const Matrix& perturbations, double tol_scale = 1e-10);

// Column sums within tol of 1 (perturbation-weight invariant).
bool has_unit_column_sums(const Matrix& w, double tol = 1e-8);

// W 1 = 1 within tol: the mean manifold, the condition under which X W
// stays centered. Filter-produced weights satisfy both sum conditions.
bool has_unit_row_sums(const Matrix& w, double tol = 1e-8);

// Eigenvalue clipping for sample covariances: eigenvalues in
// [-1e-12 * trace, 0) are roundoff and get clipped to 0; anything more
// negative throws.
Matrix clip_to_psd(const Matrix& sym, double rel_tol = 1e-12);

}  // namespace enkbf
