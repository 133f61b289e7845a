#pragma once

// Shared Monte Carlo summary helpers (normal-approximation 95% intervals).

#include <cmath>
#include <cstdint>

namespace sddemc {

inline constexpr double kZ95 = 1.959963984540054;  // two-sided 95% quantile

// Halfwidth of the 95% CI of the sample mean, from raw first/second moments.
inline double mean_halfwidth(double sum, double sumsq, std::int64_t n) {
  if (n < 2) {
    return 0.0;
  }
  const double mean = sum / static_cast<double>(n);
  double var = (sumsq - static_cast<double>(n) * mean * mean) /
               static_cast<double>(n - 1);
  var = var > 0.0 ? var : 0.0;
  return kZ95 * std::sqrt(var / static_cast<double>(n));
}

}  // namespace sddemc
