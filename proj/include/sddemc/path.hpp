#pragma once

// Discrete-time path generation. Three one-step maps share the same noise
// convention (Brownian increment dB over the step, Poisson count dN at the
// step's end):
//
//   TEM: explicit step with drift/diffusion truncated by the clamp bounds,
//        defined for every real state.
//   BEM: drift-implicit step for the quadratic-drift case (alpha_m1 = 0,
//        rho = 2); diffusion and jump enter explicitly.
//   EM:  classical explicit step on the raw coefficients; breaks down when
//        the state leaves the positive half-line.
//
// The delayed argument of the volatility multiplier is the state exactly one
// delay back: at step k it is X(t_{k-M}) with M = steps_per_delay.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sddemc/grid.hpp"
#include "sddemc/model.hpp"
#include "sddemc/rng.hpp"
#include "sddemc/truncation.hpp"

namespace sddemc {

enum class Scheme { TEM, BEM, EM };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct SimPath {
  GridSpec grid;
  Scheme scheme = Scheme::TEM;
  std::uint64_t path_index = 0;
  std::int64_t negativity_count = 0;  // grid states strictly below zero

  // states[i] = X(t_{i - steps_per_delay}); size steps_per_delay + n_steps + 1.
  std::vector<double> states;

  // Per-step increments, kept only when requested: brownian[k] = dB over
  // [t_k, t_{k+1}), poisson[k] = jump count in that window, k in [0, n_steps).
  std::vector<double> brownian;
  std::vector<std::int64_t> poisson;

  double state_at(std::int64_t k) const {
    return states[static_cast<std::size_t>(k + grid.steps_per_delay)];
  }
};

// One explicit truncated step from x_now. Throws numerical_error if the
// result is not finite (a misbehaving volatility multiplier is the usual
// culprit: the truncated coefficients themselves are bounded).
double tem_step(const ModelParams& p, const ClampBounds& b, double delta,
                double x_now, double x_delayed, const VolatilityFunction& phi,
                double dB, std::int64_t dN);
double tem_step(const ModelParams& p, const TruncationRule& rule, double delta,
                double x_now, double x_delayed, const VolatilityFunction& phi,
                double dB, std::int64_t dN);

// One drift-implicit step: solves
//   X = x_now + (-alpha0 + alpha1*X - alpha2*X^2)*delta + noise terms,
// i.e. alpha2*delta*X^2 + (1 - alpha1*delta)*X - C = 0, and returns the
// larger root (computed in the cancellation-free form). Requires
// alpha_m1 = 0, rho = 2 and alpha1*delta < 1 (config_error otherwise);
// throws numerical_error when the quadratic has no real root.
double bem_step(const ModelParams& p, double delta, double x_now,
                double x_delayed, const VolatilityFunction& phi, double dB,
                std::int64_t dN);

// One classical explicit step on the raw coefficients. The state must be
// strictly positive; otherwise the drift is undefined and a numerical_error
// is thrown.
double em_step(const ModelParams& p, double delta, double x_now,
               double x_delayed, const VolatilityFunction& phi, double dB,
               std::int64_t dN);

// Full path from counter-based noise. The rule is consulted only by TEM.
// Stepper failures are rethrown as numerical_error annotated with the step
// index.
SimPath simulate_path(const ModelParams& p, const TruncationRule& rule,
                      const GridSpec& grid, const InitialSegment& xi,
                      const VolatilityFunction& phi, const NoiseStream& noise,
                      Scheme scheme, bool record_increments = false);

// Same, but driven by caller-supplied increment arrays (one entry per step).
// This is the kernel behind coupled-grid work, where a coarse path must
// consume aggregated fine-grid noise.
SimPath simulate_path_with_increments(const ModelParams& p,
                                      const TruncationRule& rule,
                                      const GridSpec& grid,
                                      const InitialSegment& xi,
                                      const VolatilityFunction& phi,
                                      Scheme scheme, std::span<const double> dB,
                                      std::span<const std::int64_t> dN,
                                      std::uint64_t path_index,
                                      bool record_increments = false);

// Sums fine-grid increments over windows of 2^refine_log2 steps, producing
// the increments a coarse path sees over the same time span.
void aggregate_increments(std::span<const double> fine_dB,
                          std::span<const std::int64_t> fine_dN, int refine_log2,
                          std::vector<double>& coarse_dB,
                          std::vector<std::int64_t>& coarse_dN);

// Coarse/fine pair driven by the same Brownian motion and Poisson process:
// the coarse path's increments are the window sums of the fine path's. With
// refine_log2 = 0 the two paths are bit-identical.
struct CoupledPair {
  SimPath coarse;
  SimPath fine;
  int refine_log2 = 0;
};

CoupledPair simulate_coupled_pair(const ModelParams& p, const TruncationRule& rule,
                                  const GridSpec& fine_grid, int refine_log2,
                                  const InitialSegment& xi,
                                  const VolatilityFunction& phi,
                                  const NoiseStream& noise, Scheme scheme,
                                  bool record_increments = false);

// Derives the coarse grid obtained by merging 2^refine_log2 fine steps;
// throws config_error when the fine grid cannot be coarsened that way.
GridSpec coarsen_grid(const GridSpec& fine_grid, int refine_log2);

}  // namespace sddemc
