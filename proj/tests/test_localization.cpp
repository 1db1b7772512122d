#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "enkbf/localization.hpp"

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

TEST_CASE("gaspari_cohn values and shape") {
  const double c = 2.3;
  CHECK(gaspari_cohn(0.0, c) == 1.0);
  CHECK(gaspari_cohn(2.0 * c, c) == 0.0);
  CHECK(gaspari_cohn(3.7 * c, c) == 0.0);
  CHECK(gaspari_cohn(c, c) == doctest::Approx(5.0 / 24.0).epsilon(1e-12));

  SUBCASE("continuous at the piece boundaries") {
    for (double r : {1.0, 2.0}) {
      const double below = gaspari_cohn((r - 1e-9) * c, c);
      const double above = gaspari_cohn((r + 1e-9) * c, c);
      CHECK(std::abs(below - above) < 1e-7);  // ~ slope * 2e-9
    }
    // exact one-sided limits at r = 1 agree to 1e-12: both quintics give 5/24
    const double left = -0.25 + 0.5 + 0.625 - 5.0 / 3.0 + 1.0;
    const double right =
        1.0 / 12 - 0.5 + 0.625 + 5.0 / 3.0 - 5.0 + 4.0 - 2.0 / 3.0;
    CHECK(std::abs(left - right) < 1e-12);
  }
  SUBCASE("non-increasing on the support") {
    double prev = 1.0;
    for (int i = 1; i <= 400; ++i) {
      const double w = gaspari_cohn(2.0 * c * i / 400.0, c);
      CHECK(w <= prev + 1e-15);
      prev = w;
    }
  }
}

TEST_CASE("ring distance") {
  CHECK(ring_distance(0, 39, 40) == 1);  // gridpoints 1 and 40 are adjacent
  CHECK(ring_distance(0, 20, 40) == 20);
  CHECK(ring_distance(5, 5, 40) == 0);
  CHECK(ring_distance(2, 37, 40) == 5);
}

TEST_CASE("localize_observation_errors") {
  LocalizationConfig loc{4.0, Topology::Ring, 40};
  ObsOperator h = ObsOperator::every_other(40, 0);
  ObsErrorModel r = ObsErrorModel::isotropic(20, 1.0);
  ObservationBatch obs{Vector::Zero(20), 0, h, r};

  SUBCASE("zero distance keeps the raw variance") {
    LocalObs lo = localize_observation_errors(0, obs, loc);
    REQUIRE_FALSE(lo.kept.empty());
    CHECK(h.location_of(lo.kept[0]) == 0);
    CHECK(lo.variances[0] == doctest::Approx(1.0));
  }
  SUBCASE("taper never shrinks a variance and far obs are dropped") {
    const double cutoff = loc.cutoff();  // ~4.62
    for (Eigen::Index q : {0, 7, 20, 39}) {
      LocalObs lo = localize_observation_errors(q, obs, loc);
      for (std::size_t i = 0; i < lo.kept.size(); ++i) {
        const auto d = static_cast<double>(
            ring_distance(q, h.location_of(lo.kept[i]), 40));
        CHECK(d < cutoff);
        CHECK(lo.variances[static_cast<Eigen::Index>(i)] >=
              r.variances[lo.kept[i]]);
      }
    }
  }
}

TEST_CASE("fixed inflation") {
  SeededStream s(51, StreamKind::Instance);
  auto [mean, pert] = mean_and_perturbations(random_full(s, 4, 5));

  SUBCASE("zero delta is the identity") {
    Ensemble out = apply_fixed_inflation(pert, 0.0);
    CHECK(out.members == pert.members);
  }
  SUBCASE("sample covariance scales by (1+delta)^2") {
    Ensemble out = apply_fixed_inflation(pert, 0.3);
    Matrix p0 = sample_covariance(pert);
    Matrix p1 = sample_covariance(out);
    CHECK((p1 - 1.69 * p0).norm() / p0.norm() < 1e-12);
  }
  SUBCASE("zero perturbations stay zero") {
    Ensemble zero{Matrix::Zero(3, 4), EnsembleRole::Perturbation};
    CHECK(apply_fixed_inflation(zero, 0.5).members.cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("adaptive inflation update") {
  SeededStream s(53, StreamKind::Instance);
  const Eigen::Index l = 6, m = 5;
  Matrix y(l, m);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) y(i, j) = s.normal();
  }
  y = y.colwise() - y.rowwise().mean().eval();
  Vector r_loc = Vector::Constant(l, 1.3);

  double trace = 0.0;
  for (Eigen::Index i = 0; i < l; ++i) {
    trace += y.row(i).squaredNorm() / r_loc[i];
  }
  trace /= static_cast<double>(m - 1);

  SUBCASE("statistically consistent innovations are a fixed point") {
    const double delta0 = 0.12;
    InflationState st = InflationState::uniform(3, delta0);
    const double target =
        static_cast<double>(l) + (1.0 + delta0) * (1.0 + delta0) * trace;
    const double d0 = std::sqrt(target * 1.3 / static_cast<double>(l));
    adaptive_inflation_update(st, 1, Vector::Constant(l, d0), y, r_loc);
    CHECK(st.delta[1] == doctest::Approx(delta0).epsilon(1e-12));
    CHECK(st.delta[0] == delta0);  // other gridpoints untouched
  }
  SUBCASE("estimates below the floor clamp and never go negative") {
    InflationState st = InflationState::uniform(1, 0.0);
    adaptive_inflation_update(st, 0, Vector::Zero(l), y, r_loc);
    CHECK(st.delta[0] == 0.0);
    // large innovations push delta up but the cap holds
    for (int rep = 0; rep < 400; ++rep) {
      adaptive_inflation_update(st, 0, Vector::Constant(l, 50.0), y, r_loc);
      CHECK(st.delta[0] <= st.params.delta_max);
      CHECK(st.delta[0] >= st.params.delta_min);
    }
    CHECK(st.delta[0] == st.params.delta_max);
  }
  SUBCASE("collapsed local ensemble counts a warning, keeps delta") {
    InflationState st = InflationState::uniform(1, 0.2);
    adaptive_inflation_update(st, 0, Vector::Ones(l), Matrix::Zero(l, m),
                              r_loc);
    CHECK(st.delta[0] == 0.2);
    CHECK(st.warnings == 1);
  }
}

TEST_CASE("local analysis sweep") {
  SeededStream s(59, StreamKind::Instance);
  const Eigen::Index n = 12, m = 5;
  Ensemble bg = random_full(s, n, m);
  ObsOperator h = ObsOperator::every_other(n, 0);
  ObsErrorModel r = ObsErrorModel::isotropic(h.rows(), 1.0);
  SeededStream obs_stream(60, StreamKind::ObsNoise);
  Vector truth = s.normal_vector(n);
  ObservationBatch obs = synthesize_observations(truth, h, r, obs_stream);
  IntegrationScheme scheme{StepScheme::DSI,
                           build_schedule(ScheduleKind::Uniform, 4)};

  SUBCASE("huge radius with uniform delta matches the global analysis") {
    LocalizationConfig loc{1e7, Topology::Ring, n};
    const double delta = 0.08;
    InflationState st = InflationState::uniform(n, delta);
    SweepResult sweep =
        local_analysis_sweep(FilterKind::LETKF, bg, obs, loc, st, scheme,
                             MeanUpdateMode::PerStep, false);
    REQUIRE_FALSE(sweep.analysis.failed);
    AnalysisResult global = letkf_analysis(bg, obs, delta);
    CHECK((sweep.analysis.analysis.members - global.analysis.members)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
  SUBCASE("gridpoints without observations keep the inflated background") {
    // one observation at gridpoint 0 only
    ObsOperator h0 = ObsOperator::selection({0}, n);
    ObsErrorModel r0 = ObsErrorModel::isotropic(1, 1.0);
    SeededStream stream0(61, StreamKind::ObsNoise);
    ObservationBatch obs0 =
        synthesize_observations(truth, h0, r0, stream0);
    LocalizationConfig loc{0.8, Topology::Ring, n};  // cutoff ~2.9
    const double delta = 0.25;
    InflationState st = InflationState::uniform(n, delta);
    SweepResult sweep =
        local_analysis_sweep(FilterKind::LETKF, bg, obs0, loc, st, scheme,
                             MeanUpdateMode::PerStep, true);
    auto [mean_b, pert_b] = mean_and_perturbations(bg);
    // gridpoint 6 is far outside the cutoff ~2.31
    Eigen::RowVectorXd want =
        (1.0 + delta) * pert_b.members.row(6);
    want.array() += mean_b[6];
    CHECK((sweep.analysis.analysis.members.row(6) - want)
              .cwiseAbs()
              .maxCoeff() < 1e-14);
    // gridpoint 0 is updated
    CHECK((sweep.analysis.analysis.members.row(0) -
           (pert_b.members.row(0).array() * (1.0 + delta) + mean_b[0])
               .matrix())
              .cwiseAbs()
              .maxCoeff() > 1e-6);
    // its inflation factor moved, the unobserved one did not
    CHECK(sweep.inflation.delta[6] == delta);
  }
  SUBCASE("processing order cannot change the result") {
    LocalizationConfig loc{4.0, Topology::Ring, n};
    InflationState st = InflationState::uniform(n, 0.05);
    for (FilterKind kind :
         {FilterKind::LETKF, FilterKind::ETKBF, FilterKind::DETKBF}) {
      SweepResult forward =
          local_analysis_sweep(kind, bg, obs, loc, st, scheme,
                               MeanUpdateMode::PerStep, true);
      std::vector<Eigen::Index> reversed(static_cast<std::size_t>(n));
      for (Eigen::Index q = 0; q < n; ++q) {
        reversed[static_cast<std::size_t>(q)] = n - 1 - q;
      }
      SweepResult backward =
          local_analysis_sweep(kind, bg, obs, loc, st, scheme,
                               MeanUpdateMode::PerStep, true, &reversed);
      CHECK(forward.analysis.analysis.members ==
            backward.analysis.analysis.members);
      CHECK(forward.inflation.delta == backward.inflation.delta);
    }
  }
  SUBCASE("all three filters produce finite local analyses") {
    LocalizationConfig loc{4.0, Topology::Ring, n};
    InflationState st = InflationState::uniform(n, 0.05);
    for (FilterKind kind :
         {FilterKind::LETKF, FilterKind::ETKBF, FilterKind::DETKBF}) {
      SweepResult sweep =
          local_analysis_sweep(kind, bg, obs, loc, st, scheme,
                               MeanUpdateMode::PerStep, true);
      CHECK_FALSE(sweep.analysis.failed);
      CHECK(sweep.analysis.analysis.members.allFinite());
      CHECK(sweep.analysis.stiffness.beta > 0.0);
    }
  }
}
