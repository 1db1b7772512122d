#pragma once

#include <stdexcept>
#include <string>

#include "enkbf/ensemble.hpp"

namespace enkbf {

enum class ModelKind { Lorenz63, Lorenz96 };

// Any |x_i| beyond this flags divergence; both attractors live far below.
inline constexpr double kBlowupThreshold = 1e6;

struct ModelSpec {
  ModelKind kind = ModelKind::Lorenz63;
  // Lorenz 63 parameters
  double p = 10.0;
  double r = 28.0;
  double b = 8.0 / 3.0;
  // Lorenz 96 parameters
  int n = 40;
  double forcing = 8.0;
  // integrator step in model time units
  double dt = 0.01;

  Eigen::Index state_dim() const {
    return kind == ModelKind::Lorenz63 ? 3 : n;
  }

  static ModelSpec lorenz63(double dt = 0.01) {
    ModelSpec s;
    s.kind = ModelKind::Lorenz63;
    s.dt = dt;
    return s;
  }
  static ModelSpec lorenz96(int n = 40, double forcing = 8.0,
                            double dt = 0.025) {
    if (n < 4) throw std::invalid_argument("lorenz96: need N >= 4");
    ModelSpec s;
    s.kind = ModelKind::Lorenz96;
    s.n = n;
    s.forcing = forcing;
    s.dt = dt;
    return s;
  }
};

struct ModelBlowupError : std::runtime_error {
  explicit ModelBlowupError(const std::string& what)
      : std::runtime_error(what) {}
};

// dx/dt at x. L96 indices wrap cyclically.
Vector tendency(const ModelSpec& spec, const Vector& x);

// Classical RK4, n_steps fixed steps of spec.dt. Throws ModelBlowupError
// if the state leaves [-kBlowupThreshold, kBlowupThreshold] or goes
// non-finite.
Vector rk4_advance(const ModelSpec& spec, Vector x, long n_steps);

// Advance every member of a full ensemble.
Ensemble advance_ensemble(const ModelSpec& spec, const Ensemble& ens,
                          long n_steps);

}  // namespace enkbf
