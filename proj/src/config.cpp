#include "sddemc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sddemc/errors.hpp"
#include "sddemc/grid.hpp"

namespace sddemc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw config_error("config: " + path + ": " + what);
}

const json& require_object(const json& parent, const std::string& path) {
  if (!parent.is_object()) {
    fail(path, "must be an object");
  }
  return parent;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& known) {
  for (const auto& item : obj.items()) {
    if (known.count(item.key()) == 0) {
      fail(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
    }
  }
}

double require_number(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(path + "." + key, "required field is missing");
  }
  if (!it->is_number()) {
    fail(path + "." + key, "must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    fail(path + "." + key, "must be finite");
  }
  return v;
}

double number_or(const json& obj, const std::string& path, const char* key,
                 double fallback) {
  if (obj.find(key) == obj.end()) {
    return fallback;
  }
  return require_number(obj, path, key);
}

std::int64_t require_integer(const json& obj, const std::string& path,
                             const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(path + "." + key, "required field is missing");
  }
  if (!it->is_number_integer()) {
    fail(path + "." + key, "must be an integer");
  }
  return it->get<std::int64_t>();
}

bool bool_or(const json& obj, const std::string& path, const char* key,
             bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_boolean()) {
    fail(path + "." + key, "must be a boolean");
  }
  return it->get<bool>();
}

std::string require_string(const json& obj, const std::string& path,
                           const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(path + "." + key, "required field is missing");
  }
  if (!it->is_string()) {
    fail(path + "." + key, "must be a string");
  }
  return it->get<std::string>();
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int exact_log2(std::int64_t v) {
  int e = 0;
  while ((std::int64_t{1} << e) < v) {
    ++e;
  }
  return e;
}

// T must be an integer multiple of tau/M; this is the make_grid condition,
// surfaced here with a config field path.
void check_horizon_divisibility(double tau, double horizon, std::int64_t m,
                                const std::string& context) {
  const double n_real = horizon * static_cast<double>(m) / tau;
  const double n_round = std::llround(n_real);
  if (n_round < 1.0 || std::fabs(n_real - n_round) > 1e-9 * std::max(1.0, n_real)) {
    std::ostringstream os;
    os << "horizon must be an integer multiple of the step size tau/M (M = "
       << m << ", " << context << ")";
    fail("grid.horizon", os.str());
  }
}

void parse_model_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("model");
  if (it == root.end()) {
    fail("model", "required block is missing");
  }
  const json& m = require_object(*it, "model");
  reject_unknown_keys(m, "model",
                      {"alpha_m1", "alpha0", "alpha1", "alpha2", "alpha3", "rho",
                       "theta", "lambda"});
  cfg.params.alpha_m1 = require_number(m, "model", "alpha_m1");
  cfg.params.alpha0 = require_number(m, "model", "alpha0");
  cfg.params.alpha1 = require_number(m, "model", "alpha1");
  cfg.params.alpha2 = require_number(m, "model", "alpha2");
  cfg.params.alpha3 = require_number(m, "model", "alpha3");
  cfg.params.rho = number_or(m, "model", "rho", 2.0);
  cfg.params.theta = number_or(m, "model", "theta", 1.25);
  cfg.params.lambda = number_or(m, "model", "lambda", 0.0);
}

void parse_volatility_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("volatility");
  if (it == root.end()) {
    cfg.vol = VolatilityFunction::sigmoid();
    return;
  }
  const json& v = require_object(*it, "volatility");
  reject_unknown_keys(v, "volatility", {"type", "value"});
  const std::string type = require_string(v, "volatility", "type");
  if (type == "sigmoid") {
    if (v.find("value") != v.end()) {
      fail("volatility.value", "not used by the sigmoid multiplier");
    }
    cfg.vol = VolatilityFunction::sigmoid();
  } else if (type == "constant") {
    const double c = require_number(v, "volatility", "value");
    if (!(c >= 0.0)) {
      fail("volatility.value", "must be nonnegative");
    }
    cfg.vol = VolatilityFunction::constant(c);
  } else {
    fail("volatility.type", "must be \"sigmoid\" or \"constant\"");
  }
}

void parse_initial_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("initial");
  if (it == root.end()) {
    fail("initial", "required block is missing");
  }
  const json& b = require_object(*it, "initial");
  reject_unknown_keys(b, "initial", {"constant"});
  const double c = require_number(b, "initial", "constant");
  if (!(c > 0.0)) {
    fail("initial.constant", "initial segment must be strictly positive");
  }
  cfg.initial = InitialSegment::constant(c);
  cfg.initial_value = c;
}

void parse_truncation_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("truncation");
  if (it == root.end()) {
    return;  // defaults: pi_exponent 2/3, default mu
  }
  const json& b = require_object(*it, "truncation");
  reject_unknown_keys(b, "truncation", {"pi_exponent", "mu"});
  cfg.pi_exponent = number_or(b, "truncation", "pi_exponent", cfg.pi_exponent);
  if (!(cfg.pi_exponent > 0.0)) {
    fail("truncation.pi_exponent", "must be positive");
  }
  if (b.find("mu") != b.end()) {
    const std::string mu = require_string(b, "truncation", "mu");
    if (mu != "default") {
      fail("truncation.mu", "only \"default\" is available");
    }
  }
}

void parse_grid_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("grid");
  if (it == root.end()) {
    fail("grid", "required block is missing");
  }
  const json& g = require_object(*it, "grid");
  reject_unknown_keys(g, "grid",
                      {"tau", "horizon", "steps_per_delay", "ladder", "reference"});
  cfg.tau = require_number(g, "grid", "tau");
  if (!(cfg.tau > 0.0)) {
    fail("grid.tau", "delay must be positive");
  }
  cfg.params.tau = cfg.tau;
  cfg.horizon = require_number(g, "grid", "horizon");
  if (!(cfg.horizon > 0.0)) {
    fail("grid.horizon", "must be positive");
  }

  const bool has_m = g.find("steps_per_delay") != g.end();
  const bool has_ladder = g.find("ladder") != g.end();
  if (!has_m && !has_ladder) {
    fail("grid", "needs steps_per_delay or a ladder of them");
  }
  if (has_m && has_ladder) {
    fail("grid", "steps_per_delay and ladder are mutually exclusive");
  }

  if (has_m) {
    cfg.steps_per_delay = require_integer(g, "grid", "steps_per_delay");
    if (cfg.steps_per_delay < 1) {
      fail("grid.steps_per_delay", "must be at least 1");
    }
    if (g.find("reference") != g.end()) {
      fail("grid.reference", "only meaningful together with a ladder");
    }
    check_horizon_divisibility(cfg.tau, cfg.horizon, cfg.steps_per_delay,
                               "grid.steps_per_delay");
    return;
  }

  const json& ladder = g.at("ladder");
  if (!ladder.is_array() || ladder.empty()) {
    fail("grid.ladder", "must be a non-empty array of steps-per-delay values");
  }
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!ladder[i].is_number_integer()) {
      fail("grid.ladder", "entries must be integers");
    }
    const auto m = ladder[i].get<std::int64_t>();
    if (m < 1) {
      fail("grid.ladder", "entries must be at least 1");
    }
    cfg.ladder.push_back(m);
  }
  if (g.find("reference") != g.end()) {
    cfg.reference_steps = require_integer(g, "grid", "reference");
  } else {
    cfg.reference_steps = *std::max_element(cfg.ladder.begin(), cfg.ladder.end());
  }
  if (cfg.reference_steps < 1) {
    fail("grid.reference", "must be at least 1");
  }
  for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
    const std::int64_t m = cfg.ladder[i];
    if (m > cfg.reference_steps || cfg.reference_steps % m != 0 ||
        !is_power_of_two(cfg.reference_steps / m)) {
      std::ostringstream os;
      os << "entry " << m << " must divide the reference " << cfg.reference_steps
         << " with a power-of-two ratio";
      fail("grid.ladder", os.str());
    }
    check_horizon_divisibility(cfg.tau, cfg.horizon, m, "ladder entry");
  }
  check_horizon_divisibility(cfg.tau, cfg.horizon, cfg.reference_steps,
                             "grid.reference");
}

void parse_run_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("run");
  if (it == root.end()) {
    fail("run", "required block is missing");
  }
  const json& r = require_object(*it, "run");
  reject_unknown_keys(r, "run",
                      {"seed", "n_paths", "schemes", "p", "inverse_moments",
                       "max_failed_fraction"});

  const auto seed_it = r.find("seed");
  if (seed_it == r.end()) {
    fail("run.seed", "required (runs must be reproducible; there is no "
                     "nondeterministic default)");
  }
  if (!seed_it->is_number_unsigned() && !seed_it->is_number_integer()) {
    fail("run.seed", "must be a nonnegative integer");
  }
  if (seed_it->is_number_integer() && seed_it->get<std::int64_t>() < 0) {
    fail("run.seed", "must be nonnegative");
  }
  cfg.seed = seed_it->get<std::uint64_t>();

  cfg.n_paths = require_integer(r, "run", "n_paths");
  if (cfg.n_paths < 1) {
    fail("run.n_paths", "must be at least 1");
  }

  const auto schemes_it = r.find("schemes");
  if (schemes_it == r.end()) {
    cfg.schemes = {Scheme::TEM};
  } else {
    if (!schemes_it->is_array() || schemes_it->empty()) {
      fail("run.schemes", "must be a non-empty array of scheme names");
    }
    for (const auto& s : *schemes_it) {
      if (!s.is_string()) {
        fail("run.schemes", "entries must be strings");
      }
      try {
        cfg.schemes.push_back(scheme_from_name(s.get<std::string>()));
      } catch (const config_error& e) {
        fail("run.schemes", e.what());
      }
    }
  }

  cfg.p = number_or(r, "run", "p", 2.0);
  if (!(cfg.p >= 2.0 && cfg.p <= 8.0)) {
    fail("run.p", "order must lie in [2, 8]");
  }
  cfg.inverse_moments = bool_or(r, "run", "inverse_moments", false);
  cfg.max_failed_fraction =
      number_or(r, "run", "max_failed_fraction", 0.0);
  if (!(cfg.max_failed_fraction >= 0.0 && cfg.max_failed_fraction < 1.0)) {
    fail("run.max_failed_fraction", "must lie in [0, 1)");
  }
}

void parse_pricing_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("pricing");
  if (it == root.end()) {
    return;
  }
  const json& b = require_object(*it, "pricing");
  reject_unknown_keys(b, "pricing", {"bond", "barrier"});
  const auto bond_it = b.find("bond");
  if (bond_it != b.end()) {
    const json& bb = require_object(*bond_it, "pricing.bond");
    reject_unknown_keys(bb, "pricing.bond", {"maturity"});
    BondSpec spec;
    spec.maturity = require_number(bb, "pricing.bond", "maturity");
    if (!(spec.maturity > 0.0)) {
      fail("pricing.bond.maturity", "must be positive");
    }
    if (spec.maturity > cfg.horizon * (1.0 + 1e-12)) {
      fail("pricing.bond.maturity", "exceeds grid.horizon");
    }
    cfg.bond = spec;
  }
  const auto bar_it = b.find("barrier");
  if (bar_it != b.end()) {
    const json& bb = require_object(*bar_it, "pricing.barrier");
    reject_unknown_keys(bb, "pricing.barrier", {"expiry", "strike", "barrier"});
    BarrierOptionSpec spec;
    spec.expiry = require_number(bb, "pricing.barrier", "expiry");
    if (!(spec.expiry > 0.0)) {
      fail("pricing.barrier.expiry", "must be positive");
    }
    if (spec.expiry > cfg.horizon * (1.0 + 1e-12)) {
      fail("pricing.barrier.expiry", "exceeds grid.horizon");
    }
    spec.strike = require_number(bb, "pricing.barrier", "strike");
    if (!(spec.strike >= 0.0)) {
      fail("pricing.barrier.strike", "must be nonnegative");
    }
    if (bb.find("barrier") != bb.end()) {
      const double level = require_number(bb, "pricing.barrier", "barrier");
      if (!(level > 0.0)) {
        fail("pricing.barrier.barrier",
             "must be positive (omit the field for an unmonitored contract)");
      }
      spec.barrier = level;
    }
    cfg.barrier = spec;
  }
  if (!cfg.bond.has_value() && !cfg.barrier.has_value()) {
    fail("pricing", "block present but configures no instrument");
  }
}

void parse_output_block(const json& root, ExperimentConfig& cfg) {
  const auto it = root.find("output");
  if (it == root.end()) {
    return;
  }
  if (!it->is_string() || it->get<std::string>().empty()) {
    fail("output", "must be a non-empty directory path");
  }
  cfg.output_dir = it->get<std::string>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: not valid JSON: ") + e.what());
  }
  require_object(root, "(root)");
  reject_unknown_keys(root, "",
                      {"model", "volatility", "initial", "truncation", "grid",
                       "run", "pricing", "output"});

  ExperimentConfig cfg;
  parse_model_block(root, cfg);
  parse_volatility_block(root, cfg);
  parse_initial_block(root, cfg);
  parse_truncation_block(root, cfg);
  parse_grid_block(root, cfg);
  parse_run_block(root, cfg);
  parse_pricing_block(root, cfg);
  parse_output_block(root, cfg);

  const ValidationReport model_report = validate_params(cfg.params);
  if (!model_report.ok) {
    std::string msg = "config: model: ";
    for (std::size_t i = 0; i < model_report.violations.size(); ++i) {
      if (i > 0) {
        msg += "; ";
      }
      msg += model_report.violations[i];
    }
    throw config_error(msg);
  }
  const ValidationReport init_report = validate_initial(cfg.initial, cfg.tau);
  if (!init_report.ok) {
    throw config_error("config: initial: " + init_report.violations.front());
  }

  // The Poisson sampler inverts the CDF directly, which needs a bounded
  // per-step mean; the coarsest configured grid is the binding one.
  for (const double delta : configured_deltas(cfg)) {
    if (cfg.params.lambda * delta > 10.0) {
      fail("model.lambda",
           "lambda * delta exceeds 10 on the coarsest grid; refine the grid "
           "or lower the intensity");
    }
  }

  cfg.canonical_text = root.dump();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) {
    throw config_error("config: cannot read file: " + file.string());
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

std::string config_hash(const std::string& canonical_text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical_text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<double> configured_deltas(const ExperimentConfig& cfg) {
  std::vector<double> deltas;
  if (cfg.steps_per_delay > 0) {
    deltas.push_back(cfg.tau / static_cast<double>(cfg.steps_per_delay));
  }
  for (const std::int64_t m : cfg.ladder) {
    deltas.push_back(cfg.tau / static_cast<double>(m));
  }
  if (cfg.reference_steps > 0) {
    deltas.push_back(cfg.tau / static_cast<double>(cfg.reference_steps));
  }
  return deltas;
}

std::vector<int> ladder_refine_exponents(const ExperimentConfig& cfg) {
  std::vector<int> exponents;
  exponents.reserve(cfg.ladder.size());
  for (const std::int64_t m : cfg.ladder) {
    exponents.push_back(exact_log2(cfg.reference_steps / m));
  }
  return exponents;
}

}  // namespace sddemc
