#include "enkbf/obs.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "enkbf/format.hpp"

namespace enkbf {

ObsOperator ObsOperator::identity(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return selection(std::move(idx), n);
}

ObsOperator ObsOperator::selection(std::vector<Eigen::Index> indices,
                                   Eigen::Index n) {
  std::vector<Eigen::Index> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("ObsOperator: duplicate observed index");
  }
  for (Eigen::Index i : indices) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("ObsOperator: observed index out of range");
    }
  }
  ObsOperator op;
  op.rep_ = Selection{std::move(indices), n};
  return op;
}

ObsOperator ObsOperator::every_other(Eigen::Index n, int parity) {
  if (parity != 0 && parity != 1) {
    throw std::invalid_argument("ObsOperator: parity must be 0 or 1");
  }
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = parity; i < n; i += 2) idx.push_back(i);
  return selection(std::move(idx), n);
}

ObsOperator ObsOperator::dense(Matrix h) {
  if (!h.allFinite()) {
    throw std::invalid_argument("ObsOperator: non-finite dense operator");
  }
  ObsOperator op;
  op.rep_ = std::move(h);
  return op;
}

Eigen::Index ObsOperator::rows() const {
  if (const auto* s = std::get_if<Selection>(&rep_)) {
    return static_cast<Eigen::Index>(s->indices.size());
  }
  return std::get<Matrix>(rep_).rows();
}

Eigen::Index ObsOperator::state_dim() const {
  if (const auto* s = std::get_if<Selection>(&rep_)) return s->n;
  return std::get<Matrix>(rep_).cols();
}

Vector ObsOperator::apply(const Vector& x) const {
  if (x.size() != state_dim()) {
    throw std::invalid_argument("ObsOperator::apply: dimension mismatch");
  }
  if (const auto* s = std::get_if<Selection>(&rep_)) {
    Vector y(rows());
    for (std::size_t j = 0; j < s->indices.size(); ++j) {
      y[static_cast<Eigen::Index>(j)] = x[s->indices[j]];
    }
    return y;
  }
  return std::get<Matrix>(rep_) * x;
}

Matrix ObsOperator::apply(const Matrix& x) const {
  if (x.rows() != state_dim()) {
    throw std::invalid_argument("ObsOperator::apply: dimension mismatch");
  }
  if (const auto* s = std::get_if<Selection>(&rep_)) {
    Matrix y(rows(), x.cols());
    for (std::size_t j = 0; j < s->indices.size(); ++j) {
      y.row(static_cast<Eigen::Index>(j)) = x.row(s->indices[j]);
    }
    return y;
  }
  return std::get<Matrix>(rep_) * x;
}

bool ObsOperator::is_selection() const {
  return std::holds_alternative<Selection>(rep_);
}

Eigen::Index ObsOperator::location_of(Eigen::Index j) const {
  const auto* s = std::get_if<Selection>(&rep_);
  if (s == nullptr) {
    throw std::logic_error(
        "ObsOperator::location_of: dense operators carry no gridpoint "
        "locations");
  }
  return s->indices.at(static_cast<std::size_t>(j));
}

Matrix ObsOperator::to_dense() const {
  if (const auto* s = std::get_if<Selection>(&rep_)) {
    Matrix h = Matrix::Zero(rows(), s->n);
    for (std::size_t j = 0; j < s->indices.size(); ++j) {
      h(static_cast<Eigen::Index>(j), s->indices[j]) = 1.0;
    }
    return h;
  }
  return std::get<Matrix>(rep_);
}

ObsErrorModel::ObsErrorModel(Vector v) : variances(std::move(v)) {
  if ((variances.array() <= 0.0).any()) {
    throw std::invalid_argument("ObsErrorModel: variances must be positive");
  }
}

ObsErrorModel ObsErrorModel::isotropic(Eigen::Index l, double variance) {
  return ObsErrorModel(Vector::Constant(l, variance));
}

ObservationBatch synthesize_observations(const Vector& truth,
                                         const ObsOperator& h,
                                         const ObsErrorModel& r,
                                         SeededStream& stream, long cycle) {
  if (r.size() != h.rows()) {
    throw std::invalid_argument(
        "synthesize_observations: error model size mismatch");
  }
  Vector y = h.apply(truth);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] += std::sqrt(r.variances[i]) * stream.normal();
  }
  return ObservationBatch{std::move(y), cycle, h, r};
}

Matrix project_to_obs(const ObsOperator& h, const Ensemble& ens) {
  return h.apply(ens.members);
}

void write_observations_csv(const std::string& path,
                            const std::vector<ObservationBatch>& batches) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_observations_csv: cannot open " + path);
  }
  out << "cycle,obs_index,value\n";
  for (const auto& b : batches) {
    for (Eigen::Index i = 0; i < b.y.size(); ++i) {
      out << b.cycle << ',' << i << ',' << to_shortest(b.y[i]) << '\n';
    }
  }
}

std::vector<std::pair<long, Vector>> read_observations_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_observations_csv: cannot open " + path);
  }
  std::string line;
  std::getline(in, line);  // header
  std::map<long, std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const long cycle = std::stol(cell);
    std::getline(ss, cell, ',');  // obs_index, values arrive in order
    std::getline(ss, cell, ',');
    rows[cycle].push_back(std::stod(cell));
  }
  std::vector<std::pair<long, Vector>> out;
  out.reserve(rows.size());
  for (auto& [cycle, vals] : rows) {
    out.emplace_back(cycle, Eigen::Map<Vector>(vals.data(),
                                               static_cast<Eigen::Index>(
                                                   vals.size())));
  }
  return out;
}

}  // namespace enkbf
