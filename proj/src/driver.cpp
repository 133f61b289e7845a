#include "sddemc/driver.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "sddemc/csv.hpp"
#include "sddemc/engine.hpp"
#include "sddemc/errors.hpp"
#include "sddemc/version.hpp"

namespace sddemc {

namespace {

using nlohmann::json;

struct RunContext {
  ExperimentConfig cfg;
  TruncationRule rule;
  std::filesystem::path out_dir;
  bool seed_overridden = false;
  int threads = 0;
};

RunContext make_context(const ExperimentConfig& cfg, const DriverOptions& opt) {
  RunContext ctx;
  ctx.cfg = cfg;
  if (opt.seed_override.has_value()) {
    ctx.cfg.seed = *opt.seed_override;
    ctx.seed_overridden = true;
  }
  ctx.rule = make_truncation_rule(ctx.cfg.params, ctx.cfg.pi_exponent);
  ctx.out_dir = opt.out_dir.empty() ? std::filesystem::path(ctx.cfg.output_dir)
                                    : opt.out_dir;
  ctx.threads = opt.threads;
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

SimulationJob make_job(const RunContext& ctx, std::int64_t steps_per_delay,
                       Scheme scheme) {
  SimulationJob job;
  job.params = ctx.cfg.params;
  job.rule = ctx.rule;
  job.grid = make_grid(ctx.cfg.tau, steps_per_delay, ctx.cfg.horizon);
  job.initial = ctx.cfg.initial;
  job.vol = ctx.cfg.vol;
  job.scheme = scheme;
  job.master_seed = ctx.cfg.seed;
  job.n_paths = ctx.cfg.n_paths;
  job.max_failed_fraction = ctx.cfg.max_failed_fraction;
  return job;
}

Scheme single_scheme(const ExperimentConfig& cfg, const char* command) {
  if (cfg.schemes.size() != 1) {
    throw config_error(std::string("config: run.schemes: ") + command +
                       " uses exactly one scheme");
  }
  return cfg.schemes.front();
}

std::int64_t single_grid_steps(const ExperimentConfig& cfg, const char* command) {
  if (cfg.steps_per_delay < 1) {
    throw config_error(std::string("config: grid.steps_per_delay: ") + command +
                       " needs a single grid (use steps_per_delay, not ladder)");
  }
  return cfg.steps_per_delay;
}

json failures_json(const std::vector<FailedPath>& failures) {
  json arr = json::array();
  for (const auto& f : failures) {
    arr.push_back({{"path_index", f.path_index}, {"reason", f.reason}});
  }
  return arr;
}

json scheme_names_json(const std::vector<Scheme>& schemes) {
  json arr = json::array();
  for (const Scheme s : schemes) {
    arr.push_back(scheme_name(s));
  }
  return arr;
}

// Common manifest skeleton: identity, reproducibility inputs, and the
// step-admissibility report for every step size the command touches.
json base_manifest(const char* command, const RunContext& ctx,
                   const std::vector<double>& deltas) {
  json m;
  m["command"] = command;
  m["config_hash"] = config_hash(ctx.cfg.canonical_text);
  m["seed"] = ctx.cfg.seed;
  m["seed_overridden"] = ctx.seed_overridden;
  m["library_version"] = kLibraryVersion;
  m["n_paths"] = ctx.cfg.n_paths;
  m["schemes"] = scheme_names_json(ctx.cfg.schemes);
  m["pi_exponent"] = ctx.cfg.pi_exponent;
  m["delta_star"] = ctx.rule.delta_star;

  const PiAdmissibilityReport rep = verify_pi_admissibility(ctx.rule, deltas);
  json entries = json::array();
  json warnings = json::array();
  for (const auto& e : rep.entries) {
    entries.push_back({{"delta", e.delta},
                       {"product", e.product},
                       {"admissible", e.admissible}});
    if (!e.admissible) {
      std::ostringstream os;
      os << "step " << e.delta
         << " violates the admissibility bound delta^(1/4)*pi(delta) <= 1 "
            "(product "
         << e.product << "); convergence-rate guarantees do not apply";
      warnings.push_back(os.str());
    }
  }
  m["pi_admissibility"] = {{"all_admissible", rep.all_admissible},
                           {"entries", entries}};
  m["warnings"] = warnings;
  return m;
}

void write_manifest(const RunContext& ctx, const json& manifest) {
  const auto file = ctx.out_dir / "manifest.json";
  std::ofstream os(file, std::ios::binary);
  if (!os) {
    throw config_error("cannot open output file: " + file.string());
  }
  os << manifest.dump(2) << '\n';
  os.flush();
  if (!os) {
    throw numerical_error("write failed: " + file.string());
  }
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg, const DriverOptions& opt) {
  const RunContext ctx = make_context(cfg, opt);
  const std::int64_t m = single_grid_steps(ctx.cfg, "simulate");
  const double delta = ctx.cfg.tau / static_cast<double>(m);

  json outputs = json::array();
  json all_failures = json::array();
  for (const Scheme scheme : ctx.cfg.schemes) {
    const SimulationJob job = make_job(ctx, m, scheme);
    const GenerateResult result =
        generate_ensemble(job, ctx.threads, /*record_increments=*/true);
    enforce_failure_tolerance(job, result.failures);
    for (const SimPath& path : result.ensemble.paths) {
      const std::string name = path_csv_filename(scheme, path.path_index);
      write_path_csv(ctx.out_dir / name, path);
      outputs.push_back(name);
    }
    for (const auto& f : failures_json(result.failures)) {
      all_failures.push_back(f);
    }
  }

  json manifest = base_manifest("simulate", ctx, {delta});
  manifest["failures"] = all_failures;
  manifest["outputs"] = outputs;
  write_manifest(ctx, manifest);
}

void cmd_converge(const ExperimentConfig& cfg, const DriverOptions& opt) {
  const RunContext ctx = make_context(cfg, opt);
  const Scheme scheme = single_scheme(ctx.cfg, "converge");
  if (ctx.cfg.ladder.empty()) {
    throw config_error(
        "config: grid.ladder: converge requires a ladder of step sizes");
  }
  if (ctx.cfg.ladder.size() < 3) {
    throw config_error(
        "config: grid.ladder: converge needs at least 3 rungs to fit an order");
  }
  const std::vector<int> refine = ladder_refine_exponents(ctx.cfg);
  if (std::any_of(refine.begin(), refine.end(), [](int r) { return r < 1; })) {
    throw config_error("config: grid.ladder: every rung must be strictly "
                       "coarser than the reference grid");
  }

  const SimulationJob fine_job = make_job(ctx, ctx.cfg.reference_steps, scheme);
  const ConvergenceRunResult result =
      run_convergence(fine_job, refine, ctx.cfg.p, ctx.threads);
  enforce_failure_tolerance(fine_job, result.failures);

  write_convergence_csv(ctx.out_dir / "convergence.csv", result.points);

  // Rungs may arrive in any order; monotonicity means "error shrinks with
  // delta", so sort by delta before comparing neighbours.
  std::vector<StrongErrorPoint> by_delta = result.points;
  std::sort(by_delta.begin(), by_delta.end(),
            [](const StrongErrorPoint& a, const StrongErrorPoint& b) {
              return a.delta < b.delta;
            });
  bool decreasing = true;
  for (std::size_t i = 1; i < by_delta.size(); ++i) {
    if (!(by_delta[i].error > by_delta[i - 1].error)) {
      decreasing = false;
    }
  }

  json manifest = base_manifest("converge", ctx, configured_deltas(ctx.cfg));
  manifest["failures"] = failures_json(result.failures);
  manifest["error_order_p"] = ctx.cfg.p;
  manifest["errors_decreasing"] = decreasing;
  if (result.fit.has_value()) {
    manifest["slope"] = result.fit->slope;
    manifest["intercept"] = result.fit->intercept;
  }
  manifest["outputs"] = json::array({"convergence.csv"});
  write_manifest(ctx, manifest);
}

void cmd_moments(const ExperimentConfig& cfg, const DriverOptions& opt) {
  const RunContext ctx = make_context(cfg, opt);
  const Scheme scheme = single_scheme(ctx.cfg, "moments");
  const std::int64_t m = single_grid_steps(ctx.cfg, "moments");
  if (!(ctx.cfg.p >= 2.0)) {
    throw config_error("config: run.p: moment estimation needs p >= 2");
  }
  if (ctx.cfg.inverse_moments) {
    const double floor = std::max(2.0, ctx.cfg.params.rho - 1.0);
    if (!(ctx.cfg.p > floor)) {
      std::ostringstream os;
      os << "config: run.p: inverse moments need p > max(2, rho - 1) = " << floor;
      throw config_error(os.str());
    }
  }

  const SimulationJob job = make_job(ctx, m, scheme);
  const MomentRunResult result =
      run_moments(job, ctx.cfg.p, ctx.cfg.inverse_moments, ctx.threads);
  enforce_failure_tolerance(job, result.failures);

  write_moments_csv(ctx.out_dir / "moments.csv", result.report);

  json manifest =
      base_manifest("moments", ctx, {ctx.cfg.tau / static_cast<double>(m)});
  manifest["failures"] = failures_json(result.failures);
  manifest["moment_order_p"] = result.report.p;
  manifest["inverse"] = result.report.inverse;
  manifest["sup_estimate"] = result.report.sup_estimate;
  manifest["n_paths_used"] = result.report.n_paths_used;
  manifest["n_paths_excluded"] = result.report.n_paths_excluded;
  manifest["outputs"] = json::array({"moments.csv"});
  write_manifest(ctx, manifest);
}

void cmd_price(const ExperimentConfig& cfg, const DriverOptions& opt) {
  const RunContext ctx = make_context(cfg, opt);
  const Scheme scheme = single_scheme(ctx.cfg, "price");
  if (!ctx.cfg.bond.has_value() && !ctx.cfg.barrier.has_value()) {
    throw config_error("config: pricing: block required for the price command");
  }

  std::int64_t reference = 0;
  std::vector<int> refine;
  if (!ctx.cfg.ladder.empty()) {
    reference = ctx.cfg.reference_steps;
    refine = ladder_refine_exponents(ctx.cfg);
  } else {
    reference = single_grid_steps(ctx.cfg, "price");
    refine = {0};
  }

  const SimulationJob fine_job = make_job(ctx, reference, scheme);
  const PricingRunResult result = run_pricing(fine_job, refine, ctx.cfg.bond,
                                              ctx.cfg.barrier, ctx.threads);
  enforce_failure_tolerance(fine_job, result.failures);

  write_prices_csv(ctx.out_dir / "prices.csv", result.estimates);

  json manifest = base_manifest("price", ctx, configured_deltas(ctx.cfg));
  manifest["failures"] = failures_json(result.failures);
  json rows = json::array();
  for (const auto& est : result.estimates) {
    rows.push_back({{"instrument", est.instrument},
                    {"delta", est.delta},
                    {"value", est.value},
                    {"ci_lo", est.ci_lo},
                    {"ci_hi", est.ci_hi}});
  }
  manifest["prices"] = rows;
  manifest["outputs"] = json::array({"prices.csv"});
  write_manifest(ctx, manifest);
}

int run_command(const std::string& command,
                const std::filesystem::path& config_file,
                const DriverOptions& opt) {
  try {
    const ExperimentConfig cfg = load_config(config_file);
    if (command == "simulate") {
      cmd_simulate(cfg, opt);
    } else if (command == "converge") {
      cmd_converge(cfg, opt);
    } else if (command == "moments") {
      cmd_moments(cfg, opt);
    } else if (command == "price") {
      cmd_price(cfg, opt);
    } else {
      throw config_error("unknown command '" + command +
                         "' (expected simulate, converge, moments or price)");
    }
    return 0;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sddemc
