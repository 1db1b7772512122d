#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enkbf/dynamics.hpp"

using namespace enkbf;

TEST_CASE("tendency fixed points") {
  ModelSpec l63 = ModelSpec::lorenz63();

  SUBCASE("origin is an equilibrium of the 3-variable model") {
    CHECK(tendency(l63, Vector::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("the nontrivial equilibrium (sqrt(b(r-1)), sqrt(b(r-1)), r-1)") {
    const double c = std::sqrt(l63.b * (l63.r - 1.0));  // sqrt(72)
    Vector x(3);
    x << c, c, l63.r - 1.0;
    CHECK(tendency(l63, x).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("the 40-variable steady state x_j = F") {
    ModelSpec l96 = ModelSpec::lorenz96();
    Vector x = Vector::Constant(40, l96.forcing);
    CHECK(tendency(l96, x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rk4_advance(l96, x, 100) == x);
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(tendency(l63, Vector::Zero(4)), std::invalid_argument);
  }
}

TEST_CASE("ring symmetry: rotation commutes with the tendency") {
  ModelSpec l96 = ModelSpec::lorenz96();
  Vector x(40);
  for (int i = 0; i < 40; ++i) x[i] = std::sin(0.37 * i) + 0.1 * (i % 3);

  for (int shift : {1, 7, 39}) {
    Vector rotated(40);
    for (int i = 0; i < 40; ++i) rotated[(i + shift) % 40] = x[i];
    Vector lhs = tendency(l96, rotated);
    Vector rhs_raw = tendency(l96, x);
    Vector rhs(40);
    for (int i = 0; i < 40; ++i) rhs[(i + shift) % 40] = rhs_raw[i];
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rk4_advance basics") {
  ModelSpec l63 = ModelSpec::lorenz63();
  Vector x(3);
  x << 1.0, 2.0, 3.0;
  CHECK(rk4_advance(l63, x, 0) == x);
  CHECK_THROWS_AS(rk4_advance(l63, x, -1), std::invalid_argument);
}

TEST_CASE("rk4 order on a linear test problem") {
  // with p = 0 and x1(0) = 0 the system decouples into dx2/dt = -x2 and
  // dx3/dt = -b x3, so the integrator runs against the e^{-t} oracle
  const double t_end = 2.0;
  auto linear_error = [&](double dt) {
    ModelSpec spec = ModelSpec::lorenz63(dt);
    spec.p = 0.0;
    spec.b = 1.0;
    Vector x0(3);
    x0 << 0.0, 1.0, 1.0;
    const Vector x = rk4_advance(spec, x0, std::lround(t_end / dt));
    const double exact = std::exp(-t_end);
    return std::max(std::abs(x[1] - exact), std::abs(x[2] - exact));
  };
  const double e1 = linear_error(0.1);
  const double e2 = linear_error(0.05);
  const double e3 = linear_error(0.025);
  const double order1 = std::log2(e1 / e2);
  const double order2 = std::log2(e2 / e3);
  CHECK(order1 > 3.8);
  CHECK(order1 < 4.2);
  CHECK(order2 > 3.8);
  CHECK(order2 < 4.2);
}

TEST_CASE("blow-up is reported, not propagated") {
  // integrating the 3-variable model with a huge state trips the guard
  ModelSpec l63 = ModelSpec::lorenz63(0.1);
  Vector x(3);
  x << 9e5, 9e5, 9e5;
  CHECK_THROWS_AS(rk4_advance(l63, x, 50), ModelBlowupError);
}

TEST_CASE("advance_ensemble equals member-wise integration") {
  ModelSpec l96 = ModelSpec::lorenz96(8, 8.0, 0.025);
  Matrix members(8, 3);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) members(i, j) = 8.0 + 0.01 * (i + j);
  }
  Ensemble ens{members, EnsembleRole::Full};
  Ensemble out = advance_ensemble(l96, ens, 40);
  for (int j = 0; j < 3; ++j) {
    Vector one = rk4_advance(l96, members.col(j), 40);
    CHECK((out.members.col(j) - one).cwiseAbs().maxCoeff() == 0.0);
  }
}
