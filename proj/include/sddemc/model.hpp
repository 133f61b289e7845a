#pragma once

// Model definition for the delay Ait-Sahalia-type short-rate dynamics with
// multiplicative Poisson jumps:
//
//   dx(t) = f(x(t-)) dt + phi(x((t-tau)-)) g(x(t-)) dB(t) + h(x(t-)) dN(t)
//
//   f(x) = a_m1/x - a0 + a1*x - a2*x^rho   (drift, x > 0)
//   g(x) = x^theta                         (diffusion factor, x >= 0)
//   h(x) = a3*x for x >= 0, 0 otherwise    (jump coefficient)
//
// phi is a bounded delay-volatility multiplier evaluated at the state one
// delay tau in the past; for negative arguments it takes its value at 0.

#include <functional>
#include <string>
#include <vector>

namespace sddemc {

struct ModelParams {
  double alpha_m1 = 0.0;  // coefficient of 1/x in the drift
  double alpha0 = 0.0;    // constant drift offset (entering with minus sign)
  double alpha1 = 0.0;    // linear drift coefficient
  double alpha2 = 0.0;    // coefficient of the superlinear pullback x^rho
  double alpha3 = 0.0;    // jump scale: each jump multiplies x by (1 + alpha3)
  double rho = 2.0;       // drift pullback exponent, > 1
  double theta = 1.25;    // diffusion exponent, > 1
  double tau = 1.0;       // delay length, > 0
  double lambda = 0.0;    // Poisson jump intensity, >= 0
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks the standing parameter conditions; every violated condition is named
// in the report. The moment-balance condition 1 + rho > 2*theta is what keeps
// the superlinear drift pullback stronger than the diffusion growth.
ValidationReport validate_params(const ModelParams& p);

// Drift f(x) evaluated exactly as written. Throws std::domain_error if x <= 0.
double eval_drift(const ModelParams& p, double x);

// Diffusion factor g(x) = x^theta for x >= 0. Throws std::domain_error if x < 0.
double eval_diffusion(const ModelParams& p, double x);

// Jump coefficient h(x) = alpha3*x for x >= 0 and 0 for x < 0 (the extension
// used once discretized states may leave the positive half-line).
double eval_jump(const ModelParams& p, double x);

// Built-in delay-volatility multiplier
//   phi(y) = (1 + e^y - e^-y) / (2*(e^y + e^-y))  for y >= 0,  1/4 otherwise.
// Evaluated via e^-y and e^-2y so large arguments cannot overflow.
// Range: [1/4, sqrt(5)/4], the supremum attained at y = ln(2 + sqrt(5)).
double sigmoid_phi(double y);

// Delay-volatility multiplier together with its declared bound. eval is
// defined on [0, inf); operator() applies the extension phi(y) = phi(0) for
// y < 0, so the multiplier is usable on all of R.
struct VolatilityFunction {
  std::function<double(double)> eval;
  double sigma_bound = 0.0;  // declared sup bound: |phi(y)| <= sigma_bound
  std::string description;

  double operator()(double y) const { return eval(y < 0.0 ? 0.0 : y); }

  static VolatilityFunction sigmoid();
  static VolatilityFunction constant(double c);
};

// Initial segment xi on [-tau, 0] with its declared Hoelder regularity:
// |xi(t) - xi(s)| <= holder_const * |t - s|^holder_gamma.
struct InitialSegment {
  std::function<double(double)> value;
  double holder_gamma = 1.0;  // in (0, 1]
  double holder_const = 0.0;  // >= 0

  double operator()(double t) const { return value(t); }

  static InitialSegment constant(double c);
};

// Sampled check of the initial segment: positivity on [-tau, 0] and the
// declared Hoelder bound on sampled pairs (with a small numerical slack).
ValidationReport validate_initial(const InitialSegment& xi, double tau);

}  // namespace sddemc
