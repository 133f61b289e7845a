#include "sddemc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sddemc {

namespace {

void check(bool ok, ValidationReport& rep, const std::string& msg) {
  if (!ok) {
    rep.ok = false;
    rep.violations.push_back(msg);
  }
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_params(const ModelParams& p) {
  ValidationReport rep;
  check(std::isfinite(p.alpha_m1) && p.alpha_m1 >= 0.0, rep,
        "alpha_m1 must be a nonnegative real (got " + num(p.alpha_m1) + ")");
  check(std::isfinite(p.alpha0) && p.alpha0 >= 0.0, rep,
        "alpha0 must be a nonnegative real (got " + num(p.alpha0) + ")");
  check(std::isfinite(p.alpha1) && p.alpha1 >= 0.0, rep,
        "alpha1 must be a nonnegative real (got " + num(p.alpha1) + ")");
  check(std::isfinite(p.alpha2) && p.alpha2 > 0.0, rep,
        "alpha2 must be positive so the superlinear pullback is present (got " +
            num(p.alpha2) + ")");
  check(std::isfinite(p.alpha3) && p.alpha3 > 0.0, rep,
        "alpha3 must be positive (got " + num(p.alpha3) + ")");
  check(std::isfinite(p.rho) && p.rho > 1.0, rep,
        "rho must exceed 1 (got " + num(p.rho) + ")");
  check(std::isfinite(p.theta) && p.theta > 1.0, rep,
        "theta must exceed 1 (got " + num(p.theta) + ")");
  if (std::isfinite(p.rho) && std::isfinite(p.theta)) {
    check(1.0 + p.rho > 2.0 * p.theta, rep,
          "moment-balance condition violated: 1 + rho must exceed 2*theta "
          "(got 1 + " + num(p.rho) + " <= 2*" + num(p.theta) + ")");
  }
  check(std::isfinite(p.tau) && p.tau > 0.0, rep,
        "tau must be positive (got " + num(p.tau) + ")");
  check(std::isfinite(p.lambda) && p.lambda >= 0.0, rep,
        "lambda must be a nonnegative real (got " + num(p.lambda) + ")");
  return rep;
}

double eval_drift(const ModelParams& p, double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("eval_drift: x must be positive");
  }
  return p.alpha_m1 / x - p.alpha0 + p.alpha1 * x - p.alpha2 * std::pow(x, p.rho);
}

double eval_diffusion(const ModelParams& p, double x) {
  if (x < 0.0 || !std::isfinite(x)) {
    throw std::domain_error("eval_diffusion: x must be nonnegative");
  }
  return std::pow(x, p.theta);
}

double eval_jump(const ModelParams& p, double x) {
  return x >= 0.0 ? p.alpha3 * x : 0.0;
}

double sigmoid_phi(double y) {
  if (y < 0.0) {
    return 0.25;
  }
  // (1 + e^y - e^-y) / (2 (e^y + e^-y)), rescaled by e^-y top and bottom.
  const double emy = std::exp(-y);
  const double em2y = emy * emy;
  return 0.5 * (emy + 1.0 - em2y) / (1.0 + em2y);
}

VolatilityFunction VolatilityFunction::sigmoid() {
  VolatilityFunction v;
  v.eval = [](double y) { return sigmoid_phi(y); };
  // sup phi = sqrt(5)/4 = 0.55901699..., attained at y = ln(2 + sqrt(5));
  // declared bound is that supremum rounded up at the fourth decimal.
  v.sigma_bound = 0.5591;
  v.description = "sigmoid";
  return v;
}

VolatilityFunction VolatilityFunction::constant(double c) {
  if (!(std::isfinite(c) && c >= 0.0)) {
    throw std::invalid_argument("VolatilityFunction::constant: c must be a nonnegative real");
  }
  VolatilityFunction v;
  v.eval = [c](double) { return c; };
  v.sigma_bound = c;
  v.description = "constant(" + num(c) + ")";
  return v;
}

InitialSegment InitialSegment::constant(double c) {
  InitialSegment xi;
  xi.value = [c](double) { return c; };
  xi.holder_gamma = 1.0;
  xi.holder_const = 0.0;
  return xi;
}

ValidationReport validate_initial(const InitialSegment& xi, double tau) {
  ValidationReport rep;
  check(std::isfinite(tau) && tau > 0.0, rep, "tau must be positive");
  check(xi.holder_gamma > 0.0 && xi.holder_gamma <= 1.0, rep,
        "initial segment Hoelder exponent must lie in (0, 1]");
  check(xi.holder_const >= 0.0, rep,
        "initial segment Hoelder constant must be nonnegative");
  if (!rep.ok) {
    return rep;
  }
  constexpr int kSamples = 257;
  std::vector<double> ts(kSamples), vs(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    ts[i] = -tau + tau * static_cast<double>(i) / (kSamples - 1);
    vs[i] = xi(ts[i]);
    if (!(std::isfinite(vs[i]) && vs[i] > 0.0)) {
      rep.ok = false;
      rep.violations.push_back("initial segment must be positive on [-tau, 0] (xi(" +
                               num(ts[i]) + ") = " + num(vs[i]) + ")");
      return rep;
    }
  }
  // Sampled Hoelder bound with a proportional slack for roundoff.
  for (int i = 0; i < kSamples; ++i) {
    for (int j = i + 1; j < kSamples; j += 8) {
      const double lhs = std::fabs(vs[i] - vs[j]);
      const double rhs = xi.holder_const * std::pow(ts[j] - ts[i], xi.holder_gamma);
      if (lhs > rhs * (1.0 + 1e-12) + 1e-12) {
        rep.ok = false;
        rep.violations.push_back(
            "initial segment violates its declared Hoelder bound between t = " +
            num(ts[i]) + " and t = " + num(ts[j]));
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace sddemc
