#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace homog {

/// Radial quadrature resolution for integrals against r^{-1-alpha} dr.
struct RadialQuad {
  int nodes_per_decade = 64;
};

/// Integrates g(r) * r^{-1-alpha} dr over [r1, r2] by the midpoint rule in
/// s = log r. The substitution absorbs the power-law singularity structure.
template <class G>
double radial_log_integral(double r1, double r2, double alpha, int nodes_per_decade, G&& g) {
  if (!(r2 > r1) || r1 <= 0.0) return 0.0;
  const double s1 = std::log(r1), s2 = std::log(r2);
  const double decades = (s2 - s1) / std::numbers::ln10;
  const std::int64_t n =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(decades * nodes_per_decade)));
  const double h = (s2 - s1) / static_cast<double>(n);
  double acc = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double s = s1 + (static_cast<double>(k) + 0.5) * h;
    const double r = std::exp(s);
    acc += g(r) * std::exp(-alpha * s);
  }
  return acc * h;
}

}  // namespace homog
