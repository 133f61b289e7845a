// Wall-time comparison of the two moment pipelines on the same workload:
//
//   reference: one path at a time through the plain path generator, then the
//              serial estimator from the analysis module;
//   engine:    the fused block-parallel driver, at 1 thread and at all
//              available threads.
//
// The engine is required to reproduce the reference within floating-point
// noise, so the benchmark doubles as an end-to-end agreement check. On a
// single-core host the parallel row will honestly show no speedup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "sddemc/analysis.hpp"
#include "sddemc/engine.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t n_paths = 512;
  std::int64_t steps_per_delay = 256;
  double horizon = 2.0;

  CLI::App app{"moment-pipeline benchmark"};
  app.add_option("--paths", n_paths, "number of Monte Carlo paths");
  app.add_option("--steps-per-delay", steps_per_delay, "grid resolution M");
  app.add_option("--horizon", horizon, "time horizon T");
  CLI11_PARSE(app, argc, argv);

  sddemc::SimulationJob job;
  job.params.alpha_m1 = 0.2;
  job.params.alpha0 = 0.3;
  job.params.alpha1 = 0.2;
  job.params.alpha2 = 0.5;
  job.params.alpha3 = 1.0;
  job.params.lambda = 1.0;
  job.rule = sddemc::make_truncation_rule(job.params, 2.0 / 3.0);
  job.grid = sddemc::make_grid(1.0, steps_per_delay, horizon);
  job.initial = sddemc::InitialSegment::constant(0.2);
  job.vol = sddemc::VolatilityFunction::sigmoid();
  job.scheme = sddemc::Scheme::TEM;
  job.master_seed = 20260817;
  job.n_paths = n_paths;

  const double p = 2.0;
  std::printf("workload: %lld paths, M=%lld, T=%g, p=%g\n",
              static_cast<long long>(n_paths),
              static_cast<long long>(steps_per_delay), horizon, p);

  auto t0 = std::chrono::steady_clock::now();
  sddemc::GenerateResult gen = sddemc::generate_ensemble(job, 1, false);
  const sddemc::MomentReport ref =
      sddemc::estimate_moments(gen.ensemble, p, false);
  const double t_ref = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const sddemc::MomentRunResult one = sddemc::run_moments(job, p, false, 1);
  const double t_one = seconds_since(t0);

  const int all = sddemc::resolve_threads(0);
  t0 = std::chrono::steady_clock::now();
  const sddemc::MomentRunResult par = sddemc::run_moments(job, p, false, all);
  const double t_par = seconds_since(t0);

  double max_rel = 0.0;
  for (std::size_t k = 0; k < ref.estimates.size(); ++k) {
    const double scale = std::fabs(ref.estimates[k]) + 1e-300;
    max_rel = std::max(max_rel,
                       std::fabs(ref.estimates[k] - one.report.estimates[k]) / scale);
    max_rel = std::max(max_rel,
                       std::fabs(ref.estimates[k] - par.report.estimates[k]) / scale);
  }

  std::printf("%-32s %10.3f s\n", "serial reference pipeline", t_ref);
  std::printf("%-32s %10.3f s  speedup %.2fx\n", "fused engine, 1 thread", t_one,
              t_ref / t_one);
  std::printf("%-32s %10.3f s  speedup %.2fx  (%d threads)\n",
              "fused engine, all threads", t_par, t_ref / t_par, all);
  std::printf("max relative disagreement: %.3e\n", max_rel);

  if (max_rel > 1e-9) {
    std::printf("FAIL: engine disagrees with the serial reference\n");
    return 1;
  }
  std::printf("engine matches the serial reference\n");
  return 0;
}
