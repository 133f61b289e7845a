#pragma once

// Truncation machinery for the explicit scheme. A rule is a pair (mu, pi):
// mu(r) dominates sup_{1/r <= x <= r} (|f(x)| v g(x)) for radii r > 1, and
// pi maps a step size to the coefficient threshold it may use. Together they
// give per-step clamp bounds [1/mu^-1(pi(delta)), mu^-1(pi(delta))]; the
// truncated drift evaluates f on the clamped argument and the truncated
// diffusion caps its argument above (and vanishes for negative states), so
// both stay bounded by pi(delta) however far the discrete state wanders.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sddemc/model.hpp"

namespace sddemc {

// Dominating function mu with its inverse. k9 carries the scale constant for
// the default family mu(u) = k9*u^2 (NaN for custom pairs).
struct MuPair {
  std::function<double(double)> mu;
  std::function<double(double)> mu_inv;
  double k9 = 0.0;
  std::string description;
};

// Scale constant of the default dominating family: the sum of the five model
// coefficients.
double default_mu_scale(const ModelParams& p);

// Default dominating family mu(u) = k9*u^2 for the drift/diffusion pair at
// hand. Rejects (config_error) model parameters for which the domination
// spot-check fails on sampled radii.
MuPair default_mu(const ModelParams& p);

struct TruncationRule {
  MuPair mu;
  std::function<double(double)> pi;  // strictly decreasing threshold map
  double pi_exponent = 0.0;          // metadata: pi(d) = d^-pi_exponent
  double delta_star = 0.0;           // largest admissible step size
};

// Largest step delta <= 0.1 such that mu_inv(pi(delta)) > 1 and, when the
// 1/x drift term is active, f > 0 on (0, delta). Located by bisection;
// throws config_error when no admissible step exists.
double compute_delta_star(const ModelParams& p, const MuPair& mu,
                          const std::function<double(double)>& pi);

// Rule with the default mu family and pi(delta) = delta^-pi_exponent.
TruncationRule make_truncation_rule(const ModelParams& p, double pi_exponent);

// Rule from custom components. pi_exponent is metadata only (pass NaN when
// pi is not a pure power law).
TruncationRule make_truncation_rule(const ModelParams& p, MuPair mu,
                                    std::function<double(double)> pi,
                                    double pi_exponent);

// Clamp interval for one step size; lower is the exact reciprocal of upper.
struct ClampBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds for step delta. Throws config_error if delta exceeds the rule's
// delta_star or the threshold does not reach past 1.
ClampBounds clamp_bounds(const TruncationRule& rule, double delta);

// f evaluated on the argument clamped into [lower, upper]; defined for every
// real x and bounded by pi(delta).
double truncated_drift(const ModelParams& p, const ClampBounds& b, double x);
double truncated_drift(const ModelParams& p, const TruncationRule& rule,
                       double delta, double x);

// g evaluated on min(x, upper) for x >= 0, and 0 for x < 0.
double truncated_diffusion(const ModelParams& p, const ClampBounds& b, double x);
double truncated_diffusion(const ModelParams& p, const TruncationRule& rule,
                           double delta, double x);

// Step-admissibility products delta^(1/4) * pi(delta). Values above 1 violate
// the admissibility bound; runs proceed but must surface the warning.
struct PiAdmissibilityEntry {
  double delta = 0.0;
  double product = 0.0;
  bool admissible = false;
};

struct PiAdmissibilityReport {
  std::vector<PiAdmissibilityEntry> entries;
  bool all_admissible = true;
};

PiAdmissibilityReport verify_pi_admissibility(const TruncationRule& rule,
                                              std::span<const double> deltas);

}  // namespace sddemc
