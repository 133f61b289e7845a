#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "sddemc/model.hpp"

using namespace sddemc;

namespace {

ModelParams baseline_params() {
  ModelParams p;
  p.alpha_m1 = 0.2;
  p.alpha0 = 0.3;
  p.alpha1 = 0.2;
  p.alpha2 = 0.5;
  p.alpha3 = 1.0;
  p.rho = 2.0;
  p.theta = 1.25;
  p.tau = 1.0;
  p.lambda = 1.0;
  return p;
}

bool mentions(const ValidationReport& rep, const std::string& needle) {
  return std::any_of(rep.violations.begin(), rep.violations.end(),
                     [&](const std::string& v) {
                       return v.find(needle) != std::string::npos;
                     });
}

}  // namespace

TEST_CASE("drift matches hand evaluation on the experiment coefficients") {
  const ModelParams p = baseline_params();
  CHECK(eval_drift(p, 1.0) == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(eval_drift(p, 0.2) == doctest::Approx(0.72).epsilon(1e-14));

  ModelParams zeros;
  zeros.alpha_m1 = zeros.alpha0 = zeros.alpha1 = zeros.alpha2 = zeros.alpha3 = 0.0;
  CHECK(eval_drift(zeros, 3.7) == 0.0);
}

TEST_CASE("drift domain and asymptotic signs") {
  const ModelParams p = baseline_params();
  CHECK_THROWS_AS(eval_drift(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(eval_drift(p, -1.0), std::domain_error);
  // The 1/x term dominates with positive sign near 0+, the superlinear
  // pullback with negative sign at large x.
  CHECK(eval_drift(p, 1e-6) > 0.0);
  CHECK(eval_drift(p, 1e6) < 0.0);
}

TEST_CASE("diffusion is the plain power map") {
  const ModelParams p = baseline_params();
  CHECK(eval_diffusion(p, 1.0) == 1.0);
  CHECK(eval_diffusion(p, 0.0) == 0.0);
  CHECK(eval_diffusion(p, 16.0) == doctest::Approx(32.0).epsilon(1e-14));
  CHECK_THROWS_AS(eval_diffusion(p, -0.5), std::domain_error);

  // Cross-check against long-double recomposition on scattered arguments.
  oracles::ModelCoeffs m;
  m.theta = 1.25L;
  for (const double x : {0.01, 0.3, 1.7, 42.0, 900.0}) {
    const double want = static_cast<double>(oracles::diffusion_ld(m, x));
    CHECK(eval_diffusion(p, x) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("jump coefficient applies the negative-state extension") {
  const ModelParams p = baseline_params();
  CHECK(eval_jump(p, 0.2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(eval_jump(p, -0.5) == 0.0);
  CHECK(eval_jump(p, 0.0) == 0.0);
}

TEST_CASE("jump coefficient is positively homogeneous on the right half-line") {
  ModelParams p = baseline_params();
  p.alpha3 = 0.7;
  for (const double x : {0.0, 0.4, 2.0, 31.0}) {
    for (const double c : {0.5, 2.0, 13.0}) {
      CHECK(eval_jump(p, c * x) == doctest::Approx(c * eval_jump(p, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("sigmoid volatility multiplier: branch values and continuity") {
  CHECK(sigmoid_phi(0.0) == 0.25);
  CHECK(sigmoid_phi(-3.0) == 0.25);
  CHECK(sigmoid_phi(-1e-300) == 0.25);
  CHECK(sigmoid_phi(1e-12) == doctest::Approx(0.25).epsilon(1e-11));
  // Large-argument limit is 1/2; the stable form must not overflow.
  CHECK(sigmoid_phi(710.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid_phi(1e8) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sigmoid multiplier supremum located by golden-section search") {
  const auto [arg, value] = oracles::golden_max(
      [](double y) { return sigmoid_phi(y); }, 0.0, 10.0, 1e-13);
  const double want_arg = std::log(2.0 + std::sqrt(5.0));
  const double want_value = std::sqrt(5.0) / 4.0;
  CHECK(arg == doctest::Approx(want_arg).epsilon(1e-6));
  CHECK(value == doctest::Approx(want_value).epsilon(1e-12));
  // The declared bound of the built-in multiplier covers the supremum.
  CHECK(VolatilityFunction::sigmoid().sigma_bound >= want_value);
}

TEST_CASE("sigmoid multiplier stays inside its declared range on a dense grid") {
  for (int i = 0; i <= 100000; ++i) {
    const double y = -50.0 + 100.0 * static_cast<double>(i) / 100000.0;
    const double v = sigmoid_phi(y);
    CHECK(v >= 0.25);
    CHECK(v <= 0.56);
  }
}

TEST_CASE("parameter validation accepts the experiment family") {
  CHECK(validate_params(baseline_params()).ok);

  ModelParams p = baseline_params();
  p.theta = 1.6;  // 1 + 2 = 3 <= 2*1.6
  const auto rep = validate_params(p);
  CHECK_FALSE(rep.ok);
  CHECK(mentions(rep, "moment-balance"));
  CHECK(mentions(rep, "1 + rho must exceed 2*theta"));
}

TEST_CASE("parameter validation names every violated condition") {
  ModelParams p = baseline_params();
  p.alpha2 = 0.0;
  p.alpha3 = -1.0;
  p.lambda = -0.25;
  const auto rep = validate_params(p);
  CHECK_FALSE(rep.ok);
  CHECK(mentions(rep, "alpha2"));
  CHECK(mentions(rep, "alpha3"));
  CHECK(mentions(rep, "lambda"));
  CHECK(rep.violations.size() == 3);

  ModelParams q = baseline_params();
  q.rho = 1.0;
  CHECK(mentions(validate_params(q), "rho"));
  q = baseline_params();
  q.tau = 0.0;
  CHECK(mentions(validate_params(q), "tau"));
  q = baseline_params();
  q.alpha_m1 = -0.1;
  CHECK(mentions(validate_params(q), "alpha_m1"));
}

TEST_CASE("volatility wrappers: extension rule and constant family") {
  const VolatilityFunction sig = VolatilityFunction::sigmoid();
  CHECK(sig(-7.0) == sig.eval(0.0));
  CHECK(sig(2.0) == sigmoid_phi(2.0));
  CHECK(sig.description == "sigmoid");

  const VolatilityFunction c = VolatilityFunction::constant(0.3);
  CHECK(c(-1.0) == 0.3);
  CHECK(c(5.0) == 0.3);
  CHECK(c.sigma_bound == 0.3);
  CHECK_THROWS_AS(VolatilityFunction::constant(-0.1), std::invalid_argument);
}

TEST_CASE("constant initial segment validates with zero Hoelder constant") {
  const InitialSegment xi = InitialSegment::constant(0.2);
  CHECK(xi(-0.5) == 0.2);
  CHECK(xi.holder_const == 0.0);
  CHECK(validate_initial(xi, 1.0).ok);
}

TEST_CASE("initial segment validation flags nonpositive values") {
  const InitialSegment xi = InitialSegment::constant(-0.2);
  const auto rep = validate_initial(xi, 1.0);
  CHECK_FALSE(rep.ok);
  CHECK(mentions(rep, "positive"));
}

TEST_CASE("initial segment validation flags a broken Hoelder declaration") {
  InitialSegment xi;
  xi.value = [](double t) { return 1.0 + t + 1.0; };  // slope 1, not constant
  xi.holder_gamma = 1.0;
  xi.holder_const = 0.0;  // claims constancy
  const auto rep = validate_initial(xi, 1.0);
  CHECK_FALSE(rep.ok);
  CHECK(mentions(rep, "Hoelder"));

  xi.holder_const = 1.0;  // the true Lipschitz constant
  CHECK(validate_initial(xi, 1.0).ok);
}

TEST_CASE("initial segment validation rejects bad metadata") {
  InitialSegment xi = InitialSegment::constant(0.2);
  xi.holder_gamma = 0.0;
  CHECK_FALSE(validate_initial(xi, 1.0).ok);
  xi.holder_gamma = 1.5;
  CHECK_FALSE(validate_initial(xi, 1.0).ok);
  xi = InitialSegment::constant(0.2);
  xi.holder_const = -1.0;
  CHECK_FALSE(validate_initial(xi, 1.0).ok);
  CHECK_FALSE(validate_initial(InitialSegment::constant(0.2), 0.0).ok);
}
