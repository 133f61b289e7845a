#pragma once

// Uniform time grid t_k = k*delta with delta = tau/steps_per_delay. Indices
// k in [-steps_per_delay, 0] carry the initial segment; k in [0, n_steps]
// cover the simulation horizon. Step sizes are always specified through the
// integer steps_per_delay so the delay is an exact multiple of the step.

#include <cmath>
#include <cstdint>

#include "sddemc/errors.hpp"

namespace sddemc {

struct GridSpec {
  double tau = 1.0;
  std::int64_t steps_per_delay = 1;
  double horizon = 1.0;
  std::int64_t n_steps = 1;

  double delta() const { return tau / static_cast<double>(steps_per_delay); }
  double time_at(std::int64_t k) const { return static_cast<double>(k) * delta(); }

  bool operator==(const GridSpec&) const = default;
};

inline GridSpec make_grid(double tau, std::int64_t steps_per_delay, double horizon) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw config_error("grid: tau must be positive");
  }
  if (steps_per_delay < 1) {
    throw config_error("grid: steps per delay must be a positive integer");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw config_error("grid: horizon must be positive");
  }
  const double ratio = horizon * static_cast<double>(steps_per_delay) / tau;
  const auto n_steps = static_cast<std::int64_t>(std::llround(ratio));
  if (n_steps < 1 || std::fabs(ratio - static_cast<double>(n_steps)) >
                         1e-9 * std::max(1.0, std::fabs(ratio))) {
    throw config_error("grid: horizon must be an integer multiple of the step size");
  }
  return GridSpec{tau, steps_per_delay, horizon, n_steps};
}

}  // namespace sddemc
