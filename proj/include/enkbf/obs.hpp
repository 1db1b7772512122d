#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "enkbf/ensemble.hpp"
#include "enkbf/random.hpp"

namespace enkbf {

// Linear observation operator: either a sparse index selection (the
// usual case here) or an explicit dense L x N matrix.
class ObsOperator {
 public:
  static ObsOperator identity(Eigen::Index n);
  // Select a fixed list of state indices, in order. Indices must be
  // distinct and in [0, n).
  static ObsOperator selection(std::vector<Eigen::Index> indices,
                               Eigen::Index n);
  // Every other gridpoint; parity 0 observes 0-based indices {0,2,...}
  // which are the odd 1-based points {1,3,...}.
  static ObsOperator every_other(Eigen::Index n, int parity = 0);
  static ObsOperator dense(Matrix h);

  Eigen::Index rows() const;       // L
  Eigen::Index state_dim() const;  // N

  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;  // H * X, column-wise

  bool is_selection() const;
  // Gridpoint location of observation j (selection operators only).
  Eigen::Index location_of(Eigen::Index j) const;

  Matrix to_dense() const;

 private:
  ObsOperator() = default;
  struct Selection {
    std::vector<Eigen::Index> indices;
    Eigen::Index n;
  };
  std::variant<Selection, Matrix> rep_;
};

// Diagonal observation-error covariance.
struct ObsErrorModel {
  Vector variances;  // all > 0

  explicit ObsErrorModel(Vector v);
  static ObsErrorModel isotropic(Eigen::Index l, double variance);

  Eigen::Index size() const { return variances.size(); }
  Vector inverse() const { return variances.cwiseInverse(); }
};

struct ObservationBatch {
  Vector y;
  long cycle = 0;
  ObsOperator op;
  ObsErrorModel error;
};

// y = H truth + eps with eps_i ~ N(0, r_i) drawn sequentially from the
// stream; bitwise reproducible per (seed, label, counter).
ObservationBatch synthesize_observations(const Vector& truth,
                                         const ObsOperator& h,
                                         const ObsErrorModel& r,
                                         SeededStream& stream,
                                         long cycle = 0);

// Y = H * ens (perturbation or full role passes through).
Matrix project_to_obs(const ObsOperator& h, const Ensemble& ens);

// Regression-test dump/load: columns cycle,obs_index,value.
void write_observations_csv(const std::string& path,
                            const std::vector<ObservationBatch>& batches);
std::vector<std::pair<long, Vector>> read_observations_csv(
    const std::string& path);

}  // namespace enkbf
