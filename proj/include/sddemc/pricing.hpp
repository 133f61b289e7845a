#pragma once

// Monte Carlo pricing against the piecewise-constant path process. On the
// step process the time integral of the rate is exactly the left-endpoint
// sum, so the bond discount factor per path is
//
//   exp(-delta * sum_{k=0}^{n_T - 1} X(t_k)),
//
// with no quadrature error beyond the scheme itself. The barrier option pays
// (X(T) - strike)^+ on paths whose running maximum over the grid stays below
// the barrier; the payoff is reported undiscounted, exactly as defined.
// Barrier monitoring is discrete (grid points only), which is also exact for
// the step process.

#include <cstdint>
#include <optional>
#include <string>

#include "sddemc/ensemble.hpp"

namespace sddemc {

struct BondSpec {
  double maturity = 1.0;
};

struct BarrierOptionSpec {
  double expiry = 1.0;
  double strike = 0.0;
  // Disengaged optional = no barrier monitoring (the "infinite barrier"
  // sentinel): the contract degenerates to a plain terminal-payoff claim.
  std::optional<double> barrier;
};

struct PriceEstimate {
  std::string instrument;
  double delta = 0.0;
  std::int64_t n_paths = 0;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Zero-coupon bond price E[exp(-integral of X over [0, maturity])]. The
// maturity must be a grid point within the simulated horizon (config_error
// otherwise).
PriceEstimate price_bond(const Ensemble& ensemble, const BondSpec& spec);

// Up-and-out barrier call E[(X(T) - strike)^+ 1{max_{0<=k<=n_T} X(t_k) <
// barrier}], undiscounted, with discrete monitoring on the grid. The expiry
// must be a grid point within the simulated horizon.
PriceEstimate price_barrier(const Ensemble& ensemble, const BarrierOptionSpec& spec);

// Number of steps to reach horizon t on this grid; throws config_error when
// t is not a positive grid point inside the simulated range.
std::int64_t steps_to_horizon(const GridSpec& grid, double t);

// Per-path payoffs, shared with the fused engine drivers. n_T is the step
// count returned by steps_to_horizon.
double bond_discount_factor(const SimPath& path, std::int64_t n_T);
double barrier_payoff(const SimPath& path, std::int64_t n_T, double strike,
                      const std::optional<double>& barrier);

}  // namespace sddemc
