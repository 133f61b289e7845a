#include "sddemc/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sddemc/errors.hpp"

namespace sddemc {

namespace {

// Sampled sup of |f| v g over [1/r, r] (log-spaced grid plus exact endpoints).
double sampled_sup(const ModelParams& p, double r, int n_points) {
  const double lo = 1.0 / r;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(r);
  double sup = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double t = static_cast<double>(i) / (n_points - 1);
    const double x = i == 0 ? lo : (i == n_points - 1 ? r : std::exp(log_lo + t * (log_hi - log_lo)));
    const double fx = std::fabs(eval_drift(p, x));
    const double gx = eval_diffusion(p, x);
    sup = std::max(sup, std::max(fx, gx));
  }
  return sup;
}

// f > 0 on (0, d], checked on a log-spaced sample reaching far into the
// singular end where the 1/x term dominates.
bool drift_positive_below(const ModelParams& p, double d) {
  constexpr int kPoints = 129;
  const double log_lo = std::log(d) - 14.0;  // down to d * e^-14
  const double log_hi = std::log(d);
  for (int i = 0; i < kPoints; ++i) {
    const double t = static_cast<double>(i) / (kPoints - 1);
    const double x = std::exp(log_lo + t * (log_hi - log_lo));
    if (!(eval_drift(p, x) > 0.0)) {
      return false;
    }
  }
  return true;
}

}  // namespace

double default_mu_scale(const ModelParams& p) {
  return p.alpha_m1 + p.alpha0 + p.alpha1 + p.alpha2 + p.alpha3;
}

MuPair default_mu(const ModelParams& p) {
  const double k9 = default_mu_scale(p);
  // Spot-check the domination property on sampled radii; the radii near 1
  // catch scales below g(1) = 1, the large ones catch drift growth beyond
  // the quadratic envelope (e.g. rho > 2).
  constexpr double kRadii[] = {1.01, 1.5, 2.0, 5.0, 10.0, 50.0, 100.0};
  for (const double r : kRadii) {
    const double sup = sampled_sup(p, r, 129);
    const double bound = k9 * r * r;
    if (sup > bound * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "default truncation scale k9 = " << k9
         << " does not dominate |f| v g on [1/r, r] at r = " << r
         << " (sampled sup " << sup << " > " << bound << ")";
      throw config_error(os.str());
    }
  }
  MuPair m;
  m.mu = [k9](double u) { return k9 * u * u; };
  m.mu_inv = [k9](double v) { return std::sqrt(v / k9); };
  m.k9 = k9;
  std::ostringstream os;
  os << "k9*u^2 with k9 = " << k9;
  m.description = os.str();
  return m;
}

double compute_delta_star(const ModelParams& p, const MuPair& mu,
                          const std::function<double(double)>& pi) {
  const auto admissible = [&](double d) {
    if (!(d > 0.0)) {
      return false;
    }
    const double threshold = mu.mu_inv(pi(d));
    if (!(threshold > 1.0) || !std::isfinite(threshold)) {
      return false;
    }
    if (p.alpha_m1 > 0.0 && !drift_positive_below(p, d)) {
      return false;
    }
    return true;
  };

  constexpr double kCap = 0.1;
  if (admissible(kCap)) {
    return kCap;
  }
  double lo = 1e-12;
  if (!admissible(lo)) {
    throw config_error(
        "no admissible step size: mu_inv(pi(delta)) must exceed 1 (and the "
        "drift must stay positive below delta when the 1/x term is active)");
  }
  double hi = kCap;
  // Both admissibility conditions are monotone in delta, so bisection on
  // [lo admissible, hi not] converges to the largest admissible step.
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (admissible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

TruncationRule make_truncation_rule(const ModelParams& p, double pi_exponent) {
  if (!(pi_exponent > 0.0) || !std::isfinite(pi_exponent)) {
    throw config_error("pi exponent must be a positive real");
  }
  const double q = pi_exponent;
  return make_truncation_rule(
      p, default_mu(p), [q](double d) { return std::pow(d, -q); }, pi_exponent);
}

TruncationRule make_truncation_rule(const ModelParams& p, MuPair mu,
                                    std::function<double(double)> pi,
                                    double pi_exponent) {
  TruncationRule rule;
  rule.delta_star = compute_delta_star(p, mu, pi);
  rule.mu = std::move(mu);
  rule.pi = std::move(pi);
  rule.pi_exponent = pi_exponent;
  return rule;
}

ClampBounds clamp_bounds(const TruncationRule& rule, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw config_error("step size must be positive");
  }
  if (delta > rule.delta_star * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step size " << delta << " exceeds the largest admissible step "
       << rule.delta_star;
    throw config_error(os.str());
  }
  const double upper = rule.mu.mu_inv(rule.pi(delta));
  if (!(upper > 1.0) || !std::isfinite(upper)) {
    std::ostringstream os;
    os << "truncation threshold mu_inv(pi(delta)) = " << upper
       << " must exceed 1 at delta = " << delta;
    throw config_error(os.str());
  }
  return ClampBounds{1.0 / upper, upper};
}

double truncated_drift(const ModelParams& p, const ClampBounds& b, double x) {
  const double xc = x < b.lower ? b.lower : (x > b.upper ? b.upper : x);
  return eval_drift(p, xc);
}

double truncated_drift(const ModelParams& p, const TruncationRule& rule,
                       double delta, double x) {
  return truncated_drift(p, clamp_bounds(rule, delta), x);
}

double truncated_diffusion(const ModelParams& p, const ClampBounds& b, double x) {
  if (x < 0.0) {
    return 0.0;
  }
  return eval_diffusion(p, std::min(x, b.upper));
}

double truncated_diffusion(const ModelParams& p, const TruncationRule& rule,
                           double delta, double x) {
  return truncated_diffusion(p, clamp_bounds(rule, delta), x);
}

PiAdmissibilityReport verify_pi_admissibility(const TruncationRule& rule,
                                              std::span<const double> deltas) {
  PiAdmissibilityReport rep;
  rep.entries.reserve(deltas.size());
  for (const double d : deltas) {
    PiAdmissibilityEntry e;
    e.delta = d;
    e.product = std::pow(d, 0.25) * rule.pi(d);
    e.admissible = e.product <= 1.0 + 1e-12;
    rep.all_admissible = rep.all_admissible && e.admissible;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace sddemc
