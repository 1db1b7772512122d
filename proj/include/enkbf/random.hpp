#pragma once

#include <cstdint>

#include "enkbf/ensemble.hpp"

namespace enkbf {

// Named sub-streams. Every consumer owns its own label so draw order in
// one place can never perturb another (gridpoint streams are indexed).
enum class StreamKind : std::uint32_t {
  NatureInit = 1,
  ObsNoise = 2,
  EnsembleInit = 3,
  Gridpoint = 4,
  Instance = 5,  // test/oracle instance generation
};

// Counter-based standard-normal stream: draw i is a pure function of
// (seed, label, i), so streams are value types and cloning at an offset
// is the only sharing mechanism.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, StreamKind kind, std::uint32_t index = 0)
      : seed_(seed),
        label_((static_cast<std::uint64_t>(kind) << 32) | index),
        counter_(0) {}

  // Uniform on (0,1); never returns 0 or 1.
  double uniform();
  // Standard normal via inverse CDF.
  double normal();
  Vector normal_vector(Eigen::Index n);

  std::uint64_t counter() const { return counter_; }
  SeededStream at_offset(std::uint64_t counter) const {
    SeededStream s = *this;
    s.counter_ = counter;
    return s;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t label_;
  std::uint64_t counter_;
};

// Inverse of the standard normal CDF, accurate to ~1e-15 over (0,1).
double inverse_normal_cdf(double u);

}  // namespace enkbf
