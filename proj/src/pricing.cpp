#include "sddemc/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sddemc/errors.hpp"
#include "sddemc/stats.hpp"

namespace sddemc {

std::int64_t steps_to_horizon(const GridSpec& grid, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw config_error("pricing horizon must be positive");
  }
  const double ratio = t / grid.delta();
  const auto n = static_cast<std::int64_t>(std::llround(ratio));
  if (n < 1 || std::fabs(ratio - static_cast<double>(n)) >
                   1e-9 * std::max(1.0, std::fabs(ratio))) {
    throw config_error("pricing horizon must be an integer multiple of the step size");
  }
  if (n > grid.n_steps) {
    std::ostringstream os;
    os << "pricing horizon " << t << " exceeds the simulated range "
       << grid.horizon;
    throw config_error(os.str());
  }
  return n;
}

namespace {

std::vector<std::size_t> sorted_order(const std::vector<SimPath>& paths) {
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return paths[a].path_index < paths[b].path_index;
  });
  return order;
}

PriceEstimate from_sums(const char* instrument, double delta, double sum,
                        double sumsq, std::int64_t n) {
  PriceEstimate est;
  est.instrument = instrument;
  est.delta = delta;
  est.n_paths = n;
  est.value = sum / static_cast<double>(n);
  const double hw = mean_halfwidth(sum, sumsq, n);
  est.ci_lo = est.value - hw;
  est.ci_hi = est.value + hw;
  return est;
}

}  // namespace

double bond_discount_factor(const SimPath& path, std::int64_t n_T) {
  const auto m = static_cast<std::size_t>(path.grid.steps_per_delay);
  double rate_sum = 0.0;
  for (std::int64_t k = 0; k < n_T; ++k) {
    rate_sum += path.states[m + static_cast<std::size_t>(k)];
  }
  return std::exp(-path.grid.delta() * rate_sum);
}

double barrier_payoff(const SimPath& path, std::int64_t n_T, double strike,
                      const std::optional<double>& barrier) {
  const auto m = static_cast<std::size_t>(path.grid.steps_per_delay);
  if (barrier.has_value()) {
    double running_max = path.states[m];
    for (std::int64_t k = 1; k <= n_T; ++k) {
      running_max = std::max(running_max, path.states[m + static_cast<std::size_t>(k)]);
    }
    if (!(running_max < *barrier)) {
      return 0.0;
    }
  }
  const double x_T = path.states[m + static_cast<std::size_t>(n_T)];
  return std::max(x_T - strike, 0.0);
}

PriceEstimate price_bond(const Ensemble& ensemble, const BondSpec& spec) {
  if (ensemble.paths.empty()) {
    throw std::invalid_argument("price_bond: empty ensemble");
  }
  const std::int64_t n_T = steps_to_horizon(ensemble.grid, spec.maturity);
  double sum = 0.0;
  double sumsq = 0.0;
  for (const std::size_t idx : sorted_order(ensemble.paths)) {
    const double v = bond_discount_factor(ensemble.paths[idx], n_T);
    sum += v;
    sumsq += v * v;
  }
  return from_sums("bond", ensemble.grid.delta(), sum, sumsq,
                   static_cast<std::int64_t>(ensemble.paths.size()));
}

PriceEstimate price_barrier(const Ensemble& ensemble, const BarrierOptionSpec& spec) {
  if (ensemble.paths.empty()) {
    throw std::invalid_argument("price_barrier: empty ensemble");
  }
  if (!(spec.strike >= 0.0) || !std::isfinite(spec.strike)) {
    throw config_error("barrier option strike must be nonnegative");
  }
  if (spec.barrier.has_value() &&
      (!(*spec.barrier > 0.0) || !std::isfinite(*spec.barrier))) {
    throw config_error("barrier level must be positive (omit it for an "
                       "unmonitored contract)");
  }
  const std::int64_t n_T = steps_to_horizon(ensemble.grid, spec.expiry);
  double sum = 0.0;
  double sumsq = 0.0;
  for (const std::size_t idx : sorted_order(ensemble.paths)) {
    const double v = barrier_payoff(ensemble.paths[idx], n_T, spec.strike, spec.barrier);
    sum += v;
    sumsq += v * v;
  }
  return from_sums("barrier", ensemble.grid.delta(), sum, sumsq,
                   static_cast<std::int64_t>(ensemble.paths.size()));
}

}  // namespace sddemc
