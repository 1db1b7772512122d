#include "enkbf/random.hpp"

#include <cmath>

namespace enkbf {

namespace {

std::uint64_t avalanche(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t draw_word(std::uint64_t seed, std::uint64_t label,
                        std::uint64_t counter) {
  return avalanche(avalanche(avalanche(seed) ^ label) ^ counter);
}

}  // namespace

double SeededStream::uniform() {
  const std::uint64_t w = draw_word(seed_, label_, counter_++);
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

double SeededStream::normal() { return inverse_normal_cdf(uniform()); }

Vector SeededStream::normal_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

// Acklam's rational approximation refined by one Halley step against the
// exact CDF (erfc). Max relative error is around 1e-15.
double inverse_normal_cdf(double u) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (u < plow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - plow) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement: e = Phi(x) - u.
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
  const double g = inv_sqrt_2pi * std::exp(-0.5 * x * x);
  const double f = e / g;
  x -= f / (1.0 + 0.5 * x * f);
  return x;
}

}  // namespace enkbf
