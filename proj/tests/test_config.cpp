#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "sddemc/config.hpp"
#include "sddemc/errors.hpp"

using namespace sddemc;

namespace {

// Minimal valid configuration; tests splice replacements in as needed.
const char* kMinimal = R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 1.0, "horizon": 2.0, "steps_per_delay": 100},
  "run": {"seed": 42, "n_paths": 500}
})";

std::string with(const std::string& from, const std::string& to) {
  std::string text = kMinimal;
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

// Asserts the parse fails with a config_error whose message contains `needle`.
void check_rejects(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL("expected config_error for: " << needle);
  } catch (const config_error& e) {
    const std::string what = e.what();
    CHECK_MESSAGE(what.find(needle) != std::string::npos,
                  "message '" << what << "' lacks '" << needle << "'");
  }
}

}  // namespace

TEST_CASE("a minimal configuration parses with documented defaults") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.params.alpha_m1 == 0.2);
  CHECK(cfg.params.alpha0 == 0.3);
  CHECK(cfg.params.alpha1 == 0.2);
  CHECK(cfg.params.alpha2 == 0.5);
  CHECK(cfg.params.alpha3 == 1.0);
  CHECK(cfg.params.rho == 2.0);
  CHECK(cfg.params.theta == 1.25);
  CHECK(cfg.params.lambda == 0.0);
  CHECK(cfg.params.tau == 1.0);
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.horizon == 2.0);
  CHECK(cfg.steps_per_delay == 100);
  CHECK(cfg.ladder.empty());
  CHECK(cfg.seed == 42u);
  CHECK(cfg.n_paths == 500);
  REQUIRE(cfg.schemes.size() == 1u);
  CHECK(cfg.schemes[0] == Scheme::TEM);
  CHECK(cfg.p == 2.0);
  CHECK_FALSE(cfg.inverse_moments);
  CHECK(cfg.max_failed_fraction == 0.0);
  CHECK(cfg.pi_exponent == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(cfg.initial_value == 0.2);
  CHECK(cfg.output_dir == "out");
  CHECK_FALSE(cfg.bond.has_value());
  CHECK_FALSE(cfg.barrier.has_value());
  const std::vector<double> deltas = configured_deltas(cfg);
  REQUIRE(deltas.size() == 1u);
  CHECK(deltas[0] == 0.01);
}

TEST_CASE("non-JSON input and unknown fields are named in the rejection") {
  check_rejects("this is not json", "not valid JSON");
  check_rejects("[1, 2, 3]", "must be an object");
  check_rejects(with("\"run\"", "\"extra\": 1, \"run\""), "extra");
  check_rejects(with("\"alpha3\": 1.0", "\"alpha3\": 1.0, \"alpha9\": 2"),
                "model.alpha9");
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"verbose\": true"),
                "run.verbose");
  check_rejects(with("\"steps_per_delay\": 100",
                     "\"steps_per_delay\": 100, \"pad\": 1"),
                "grid.pad");
}

TEST_CASE("every required block and field is demanded by path") {
  check_rejects(with("\"model\": {\"alpha_m1\": 0.2, \"alpha0\": 0.3, \"alpha1\": 0.2, \"alpha2\": 0.5, \"alpha3\": 1.0},", ""),
                "model");
  check_rejects(with("\"alpha_m1\": 0.2, ", ""), "model.alpha_m1");
  check_rejects(with("\"initial\": {\"constant\": 0.2},", ""), "initial");
  check_rejects(with("\"grid\": {\"tau\": 1.0, \"horizon\": 2.0, \"steps_per_delay\": 100},", ""),
                "grid");
  check_rejects(with("\"run\": {\"seed\": 42, \"n_paths\": 500}", "\"run\": {\"n_paths\": 500}"),
                "reproducible");
  check_rejects(with("\"run\": {\"seed\": 42, \"n_paths\": 500}", "\"run\": {\"seed\": 42}"),
                "run.n_paths");
}

TEST_CASE("run block bounds are enforced") {
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 0"), "run.n_paths");
  check_rejects(with("\"seed\": 42", "\"seed\": -1"), "nonnegative");
  check_rejects(with("\"seed\": 42", "\"seed\": \"abc\""), "run.seed");
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"p\": 1.5"), "[2, 8]");
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"p\": 9"), "[2, 8]");
  check_rejects(with("\"n_paths\": 500",
                     "\"n_paths\": 500, \"max_failed_fraction\": 1.0"),
                "[0, 1)");
  check_rejects(with("\"n_paths\": 500",
                     "\"n_paths\": 500, \"max_failed_fraction\": -0.1"),
                "[0, 1)");
  const ExperimentConfig ok = parse_config(
      with("\"n_paths\": 500",
           "\"n_paths\": 500, \"p\": 4, \"inverse_moments\": true, "
           "\"max_failed_fraction\": 0.5"));
  CHECK(ok.p == 4.0);
  CHECK(ok.inverse_moments);
  CHECK(ok.max_failed_fraction == 0.5);
}

TEST_CASE("scheme lists parse by name and reject junk") {
  const ExperimentConfig two = parse_config(
      with("\"n_paths\": 500", "\"n_paths\": 500, \"schemes\": [\"TEM\", \"BEM\"]"));
  REQUIRE(two.schemes.size() == 2u);
  CHECK(two.schemes[0] == Scheme::TEM);
  CHECK(two.schemes[1] == Scheme::BEM);
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"schemes\": [\"XEM\"]"),
                "run.schemes");
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"schemes\": []"),
                "non-empty");
  check_rejects(with("\"n_paths\": 500", "\"n_paths\": 500, \"schemes\": [7]"),
                "strings");
}

TEST_CASE("volatility block selects the multiplier and checks its argument") {
  const ExperimentConfig constant = parse_config(
      with("\"initial\"",
           "\"volatility\": {\"type\": \"constant\", \"value\": 0.5}, \"initial\""));
  CHECK(constant.vol.eval(3.0) == 0.5);
  const ExperimentConfig sig = parse_config(
      with("\"initial\"", "\"volatility\": {\"type\": \"sigmoid\"}, \"initial\""));
  CHECK(sig.vol.eval(0.0) == 0.25);
  check_rejects(with("\"initial\"",
                     "\"volatility\": {\"type\": \"constant\", \"value\": -0.1}, \"initial\""),
                "nonnegative");
  check_rejects(with("\"initial\"",
                     "\"volatility\": {\"type\": \"sigmoid\", \"value\": 2}, \"initial\""),
                "not used");
  check_rejects(with("\"initial\"",
                     "\"volatility\": {\"type\": \"tanh\"}, \"initial\""),
                "volatility.type");
}

TEST_CASE("initial and truncation blocks are validated") {
  check_rejects(with("\"constant\": 0.2", "\"constant\": 0"), "strictly positive");
  check_rejects(with("\"constant\": 0.2", "\"constant\": -1"), "strictly positive");
  check_rejects(with("\"run\"", "\"truncation\": {\"pi_exponent\": -1}, \"run\""),
                "must be positive");
  check_rejects(with("\"run\"", "\"truncation\": {\"mu\": \"custom\"}, \"run\""),
                "only \"default\"");
  const ExperimentConfig quarter = parse_config(
      with("\"run\"", "\"truncation\": {\"pi_exponent\": 0.25}, \"run\""));
  CHECK(quarter.pi_exponent == 0.25);
}

TEST_CASE("grid accepts exactly one of a single step count or a ladder") {
  check_rejects(with("\"steps_per_delay\": 100",
                     "\"steps_per_delay\": 100, \"ladder\": [50, 100]"),
                "mutually exclusive");
  check_rejects(with(", \"steps_per_delay\": 100", ""),
                "steps_per_delay or a ladder");
  check_rejects(with("\"steps_per_delay\": 100",
                     "\"steps_per_delay\": 100, \"reference\": 200"),
                "only meaningful");
  check_rejects(with("\"tau\": 1.0", "\"tau\": 0"), "grid.tau");
  check_rejects(with("\"horizon\": 2.0", "\"horizon\": -1"), "grid.horizon");
  check_rejects(with("\"horizon\": 2.0", "\"horizon\": 2.0055"), "grid.horizon");
  check_rejects(with("\"steps_per_delay\": 100", "\"steps_per_delay\": 0"),
                "at least 1");
}

TEST_CASE("ladder rungs must divide the reference with power-of-two ratios") {
  const ExperimentConfig cfg = parse_config(
      with("\"steps_per_delay\": 100",
           "\"ladder\": [64, 128, 256], \"reference\": 1024"));
  CHECK(cfg.ladder == std::vector<std::int64_t>{64, 128, 256});
  CHECK(cfg.reference_steps == 1024);
  const std::vector<int> refine = ladder_refine_exponents(cfg);
  CHECK(refine == std::vector<int>{4, 3, 2});
  const std::vector<double> deltas = configured_deltas(cfg);
  REQUIRE(deltas.size() == 4u);
  CHECK(deltas[0] == 1.0 / 64.0);
  CHECK(deltas[1] == 1.0 / 128.0);
  CHECK(deltas[2] == 1.0 / 256.0);
  CHECK(deltas[3] == 1.0 / 1024.0);

  // Without an explicit reference the largest rung serves as one.
  const ExperimentConfig implied = parse_config(
      with("\"steps_per_delay\": 100", "\"ladder\": [64, 128, 256]"));
  CHECK(implied.reference_steps == 256);

  check_rejects(with("\"steps_per_delay\": 100",
                     "\"ladder\": [64], \"reference\": 384"),
                "power-of-two");
  check_rejects(with("\"steps_per_delay\": 100",
                     "\"ladder\": [512], \"reference\": 256"),
                "power-of-two");
  check_rejects(with("\"steps_per_delay\": 100", "\"ladder\": []"), "non-empty");
  check_rejects(with("\"steps_per_delay\": 100", "\"ladder\": [0]"), "at least 1");
  check_rejects(with("\"steps_per_delay\": 100", "\"ladder\": [1.5]"), "integers");
}

TEST_CASE("pricing block round-trips instruments and rejects bad contracts") {
  const std::string pricing =
      "\"pricing\": {\"bond\": {\"maturity\": 1.0}, "
      "\"barrier\": {\"expiry\": 2.0, \"strike\": 0.05, \"barrier\": 1.5}}, \"run\"";
  const ExperimentConfig cfg = parse_config(with("\"run\"", pricing));
  REQUIRE(cfg.bond.has_value());
  CHECK(cfg.bond->maturity == 1.0);
  REQUIRE(cfg.barrier.has_value());
  CHECK(cfg.barrier->expiry == 2.0);
  CHECK(cfg.barrier->strike == 0.05);
  REQUIRE(cfg.barrier->barrier.has_value());
  CHECK(*cfg.barrier->barrier == 1.5);

  const ExperimentConfig open = parse_config(with(
      "\"run\"",
      "\"pricing\": {\"barrier\": {\"expiry\": 1.0, \"strike\": 0.0}}, \"run\""));
  REQUIRE(open.barrier.has_value());
  CHECK_FALSE(open.barrier->barrier.has_value());
  CHECK(open.barrier->strike == 0.0);

  check_rejects(with("\"run\"", "\"pricing\": {}, \"run\""), "no instrument");
  check_rejects(with("\"run\"",
                     "\"pricing\": {\"bond\": {\"maturity\": 2.5}}, \"run\""),
                "exceeds grid.horizon");
  check_rejects(with("\"run\"",
                     "\"pricing\": {\"bond\": {\"maturity\": 0}}, \"run\""),
                "must be positive");
  check_rejects(with("\"run\"",
                     "\"pricing\": {\"barrier\": {\"expiry\": 3.0, \"strike\": 0.1}}, \"run\""),
                "exceeds grid.horizon");
  check_rejects(with("\"run\"",
                     "\"pricing\": {\"barrier\": {\"expiry\": 1.0, \"strike\": -1}}, \"run\""),
                "must be nonnegative");
  check_rejects(
      with("\"run\"",
           "\"pricing\": {\"barrier\": {\"expiry\": 1.0, \"strike\": 0.1, \"barrier\": 0}}, \"run\""),
      "must be positive");
}

TEST_CASE("model-level coherence is rechecked after parsing") {
  check_rejects(with("\"alpha2\": 0.5", "\"alpha2\": 0"), "alpha2");
  check_rejects(with("\"alpha3\": 1.0", "\"alpha3\": 1.0, \"theta\": 1.6"),
                "moment-balance");
  // Coarse grids cap the per-step jump intensity the sampler can invert.
  check_rejects(R"({
  "model": {"alpha_m1": 0.2, "alpha0": 0.3, "alpha1": 0.2, "alpha2": 0.5, "alpha3": 1.0, "lambda": 1.0},
  "initial": {"constant": 0.2},
  "grid": {"tau": 20.0, "horizon": 20.0, "steps_per_delay": 1},
  "run": {"seed": 42, "n_paths": 500}
})",
                "model.lambda");
}

TEST_CASE("the output field sets the artifact directory") {
  const ExperimentConfig cfg =
      parse_config(with("\"run\"", "\"output\": \"results/a\", \"run\""));
  CHECK(cfg.output_dir == "results/a");
  check_rejects(with("\"run\"", "\"output\": \"\", \"run\""), "non-empty");
  check_rejects(with("\"run\"", "\"output\": 7, \"run\""), "output");
}

TEST_CASE("the canonical hash is key-order independent and matches known vectors") {
  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") == "af63dc4c8601ec8c");
  const ExperimentConfig a = parse_config(kMinimal);
  const std::string reordered = R"({
  "run": {"n_paths": 500, "seed": 42},
  "grid": {"steps_per_delay": 100, "horizon": 2.0, "tau": 1.0},
  "initial": {"constant": 0.2},
  "model": {"alpha3": 1.0, "alpha2": 0.5, "alpha1": 0.2, "alpha0": 0.3, "alpha_m1": 0.2}
})";
  const ExperimentConfig b = parse_config(reordered);
  CHECK(a.canonical_text == b.canonical_text);
  CHECK(config_hash(a.canonical_text) == config_hash(b.canonical_text));
  // Any semantic change moves the hash.
  const ExperimentConfig c = parse_config(with("\"seed\": 42", "\"seed\": 43"));
  CHECK(config_hash(c.canonical_text) != config_hash(a.canonical_text));
}

TEST_CASE("loading from disk reports unreadable files") {
  CHECK_THROWS_AS(load_config("/nonexistent-dir-sddemc/config.json"), config_error);
}
