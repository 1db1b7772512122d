#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enkbf/ensemble.hpp"
#include "enkbf/random.hpp"

using namespace enkbf;

namespace {

Ensemble random_full(SeededStream& s, Eigen::Index n, Eigen::Index m) {
  Matrix x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = s.normal();
  }
  return Ensemble{x, EnsembleRole::Full};
}

}  // namespace

TEST_CASE("mean_and_perturbations on hand-checked ensembles") {
  SUBCASE("identical members") {
    Matrix x(2, 3);
    x << 4, 4, 4, -1, -1, -1;
    auto [mean, pert] = mean_and_perturbations({x, EnsembleRole::Full});
    CHECK(mean(0) == doctest::Approx(4.0));
    CHECK(mean(1) == doctest::Approx(-1.0));
    CHECK(pert.members.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("N=1 M=2") {
    Matrix x(1, 2);
    x << 0, 2;
    auto [mean, pert] = mean_and_perturbations({x, EnsembleRole::Full});
    CHECK(mean(0) == doctest::Approx(1.0));
    CHECK(pert.members(0, 0) == doctest::Approx(-1.0));
    CHECK(pert.members(0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("N=1 M=3") {
    Matrix x(1, 3);
    x << 1, 2, 3;
    auto [mean, pert] = mean_and_perturbations({x, EnsembleRole::Full});
    CHECK(mean(0) == doctest::Approx(2.0));
    CHECK(pert.members(0, 0) == doctest::Approx(-1.0));
    CHECK(pert.members(0, 1) == doctest::Approx(0.0));
    CHECK(pert.members(0, 2) == doctest::Approx(1.0));
  }
  SUBCASE("rejects role mismatch and non-finite input") {
    Matrix x(1, 2);
    x << 0, 2;
    CHECK_THROWS_AS(mean_and_perturbations({x, EnsembleRole::Perturbation}),
                    std::invalid_argument);
    x(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(mean_and_perturbations({x, EnsembleRole::Full}),
                    std::invalid_argument);
  }
}

TEST_CASE("sample_covariance") {
  SUBCASE("zero perturbations give the zero matrix") {
    Ensemble pert{Matrix::Zero(3, 4), EnsembleRole::Perturbation};
    CHECK(sample_covariance(pert).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hand example N=2 M=2") {
    Matrix x(2, 2);
    x << -1, 1, 0, 0;
    Matrix p = sample_covariance({x, EnsembleRole::Perturbation});
    CHECK(p(0, 0) == doctest::Approx(2.0));
    CHECK(p(0, 1) == doctest::Approx(0.0));
    CHECK(p(1, 1) == doctest::Approx(0.0));
  }
  SUBCASE("role mismatch throws") {
    CHECK_THROWS_AS(
        sample_covariance({Matrix::Zero(2, 2), EnsembleRole::Full}),
        std::invalid_argument);
  }
  SUBCASE("symmetric and PSD on random perturbations") {
    SeededStream s(77, StreamKind::Instance);
    for (int rep = 0; rep < 20; ++rep) {
      auto [mean, pert] = mean_and_perturbations(random_full(s, 5, 4));
      Matrix p = sample_covariance(pert);
      CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-14);
      for (int k = 0; k < 5; ++k) {
        Vector v = s.normal_vector(5);
        CHECK(v.dot(p * v) >= -1e-12 * p.trace());
      }
    }
  }
}

TEST_CASE("apply_weight_transform") {
  SeededStream s(5, StreamKind::Instance);
  Ensemble full = random_full(s, 4, 3);

  SUBCASE("identity leaves the ensemble unchanged") {
    WeightMatrix w{Matrix::Identity(3, 3), WeightRole::FullWeights};
    Ensemble out = apply_weight_transform(full, w);
    CHECK((out.members - full.members).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("U as full weights collapses every column to the mean") {
    MeanProjector u{3};
    WeightMatrix w{u.dense(), WeightRole::FullWeights};
    Ensemble out = apply_weight_transform(full, w);
    Vector mean = full.members.rowwise().mean();
    for (int j = 0; j < 3; ++j) {
      CHECK((out.members.col(j) - mean).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("dimension and role mismatches throw") {
    WeightMatrix wrong_dim{Matrix::Identity(4, 4), WeightRole::FullWeights};
    CHECK_THROWS_AS(apply_weight_transform(full, wrong_dim),
                    std::invalid_argument);
    WeightMatrix pert_w{Matrix::Identity(3, 3),
                        WeightRole::PerturbationWeights};
    CHECK_THROWS_AS(apply_weight_transform(full, pert_w),
                    std::invalid_argument);
  }
}

TEST_CASE("mean projector is idempotent as an operator") {
  SeededStream s(11, StreamKind::Instance);
  MeanProjector u{6};
  Matrix x = random_full(s, 4, 6).members;
  Matrix once = u.apply_complement(x);
  Matrix twice = u.apply_complement(once);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
  // rank-structured application matches the dense product
  Matrix dense = x * (Matrix::Identity(6, 6) - u.dense());
  CHECK((once - dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("centering idempotence and zero-mean preservation") {
  SeededStream s(13, StreamKind::Instance);
  for (int rep = 0; rep < 20; ++rep) {
    auto [mean, pert] = mean_and_perturbations(random_full(s, 6, 5));
    CHECK(is_centered(pert.members));

    // re-splitting the perturbations returns zero mean, same perturbations
    auto [mean2, pert2] =
        mean_and_perturbations({pert.members, EnsembleRole::Full});
    CHECK(mean2.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pert2.members - pert.members).cwiseAbs().maxCoeff() < 1e-12);

    // any weight matrix on the mean manifold W 1 = 1 keeps rows centered
    Matrix w(5, 5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) w(i, j) = s.normal();
    }
    w.array().colwise() -= (w.rowwise().sum().array() - 1.0) / 5.0;
    REQUIRE(has_unit_row_sums(w));
    Ensemble moved = apply_weight_transform(
        pert, WeightMatrix{w, WeightRole::PerturbationWeights});
    CHECK(is_centered(moved.members, 1e-8));
  }
}

TEST_CASE("transform identity for the sample covariance") {
  SeededStream s(17, StreamKind::Instance);
  auto [mean, pert] = mean_and_perturbations(random_full(s, 5, 4));
  Matrix w(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) w(i, j) = s.normal();
  }
  Ensemble moved{pert.members * w, EnsembleRole::Perturbation};
  Matrix lhs = (moved.members * moved.members.transpose()) / 3.0;
  Matrix rhs = pert.members * (w * w.transpose() / 3.0) *
               pert.members.transpose();
  CHECK((lhs - rhs).norm() / rhs.norm() < 1e-10);
}

TEST_CASE("clip_to_psd distinguishes roundoff from corruption") {
  Matrix ok(2, 2);
  ok << 1.0, 0.0, 0.0, -1e-14;
  Matrix clipped = clip_to_psd(ok);
  CHECK(clipped(1, 1) == 0.0);

  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1e-3;
  CHECK_THROWS_AS(clip_to_psd(bad), std::runtime_error);
}
