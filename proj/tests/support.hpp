#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>

#include "mixedspec/fourier.hpp"

namespace testing {

// Portable uniform draw: the distribution classes differ across libraries,
// mt19937_64 itself does not.
inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

/// Zero-mean real trig polynomial with |c_k| <= e^{-2 pi h k}.
inline mixedspec::FourierSeries random_series(std::mt19937_64& rng, int order,
                                              double strip_h) {
  std::map<int, mixedspec::complex> modes;
  for (int k = 1; k <= order; ++k) {
    const double r = std::exp(-2.0 * std::numbers::pi * strip_h * k) * uniform(rng, 0.2, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    modes[k] = std::polar(r, phi);
  }
  return mixedspec::FourierSeries::from_modes(modes, strip_h);
}

inline double free_eigenvalue(std::size_t j, std::size_t n) {
  return 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(j) /
                              static_cast<double>(n + 1));
}

inline double free_lyapunov_oracle(double e) {
  const double t = std::abs(2.0 - e);
  if (t <= 2.0) return 0.0;
  return std::log((t + std::sqrt(t * t - 4.0)) / 2.0);
}

}  // namespace testing
