#include "sddemc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sddemc/errors.hpp"
#include "sddemc/stats.hpp"

namespace sddemc {

namespace {

constexpr std::int64_t kBlockSize = 64;
constexpr std::int64_t kMinUsablePaths = 100;

// Runs fn(path_begin, path_end, partial) over fixed blocks of path indices
// and returns the partials in block order. The block layout is independent of
// the thread count, so any merge that walks the partials in order is
// deterministic. Exceptions other than per-path failures (which fn is
// expected to swallow into its partial) abort the run.
template <typename Partial, typename BlockFn>
std::vector<Partial> run_blocks(std::int64_t n_paths, int threads, BlockFn&& fn) {
  if (n_paths < 1) {
    throw std::invalid_argument("engine: n_paths must be positive");
  }
  const std::int64_t n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
  std::vector<Partial> partials(static_cast<std::size_t>(n_blocks));
  std::exception_ptr first_error = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    try {
      const std::int64_t begin = b * kBlockSize;
      const std::int64_t end = std::min(begin + kBlockSize, n_paths);
      fn(begin, end, partials[static_cast<std::size_t>(b)]);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(sddemc_engine_first_error)
#endif
      {
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return partials;
}

// Runs per_path(i) for each index in [begin, end), turning stepper failures
// into failure records while letting configuration errors propagate.
template <typename PerPath>
void paths_in_block(std::int64_t begin, std::int64_t end,
                    std::vector<FailedPath>& failures, PerPath&& per_path) {
  for (std::int64_t i = begin; i < end; ++i) {
    try {
      per_path(static_cast<std::uint64_t>(i));
    } catch (const numerical_error& e) {
      failures.push_back(FailedPath{static_cast<std::uint64_t>(i), e.what()});
    }
  }
}

void fill_increments(const NoiseStream& noise, std::int64_t n_steps,
                     std::vector<double>& dB, std::vector<std::int64_t>& dN) {
  dB.resize(static_cast<std::size_t>(n_steps));
  dN.resize(static_cast<std::size_t>(n_steps));
  for (std::int64_t k = 0; k < n_steps; ++k) {
    dB[static_cast<std::size_t>(k)] = noise.brownian_increment(static_cast<std::uint64_t>(k));
    dN[static_cast<std::size_t>(k)] = noise.poisson_increment(static_cast<std::uint64_t>(k));
  }
}

}  // namespace

int resolve_threads(int threads) {
  if (threads >= 1) {
    return threads;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void enforce_failure_tolerance(const SimulationJob& job,
                               const std::vector<FailedPath>& failures) {
  if (failures.empty()) {
    return;
  }
  const double fraction = static_cast<double>(failures.size()) /
                          static_cast<double>(job.n_paths);
  if (fraction > job.max_failed_fraction) {
    std::ostringstream os;
    os << failures.size() << " of " << job.n_paths
       << " paths failed numerically (tolerated fraction "
       << job.max_failed_fraction << "); first failure: " << failures.front().reason;
    throw numerical_error(os.str());
  }
}

GenerateResult generate_ensemble(const SimulationJob& job, int threads,
                                 bool record_increments) {
  struct Partial {
    std::vector<SimPath> paths;
    std::vector<FailedPath> failures;
  };

  const int nt = resolve_threads(threads);
  auto partials = run_blocks<Partial>(
      job.n_paths, nt, [&](std::int64_t begin, std::int64_t end, Partial& out) {
        paths_in_block(begin, end, out.failures, [&](std::uint64_t idx) {
          const NoiseStream noise(job.master_seed, idx, job.grid.delta(),
                                  job.params.lambda);
          out.paths.push_back(simulate_path(job.params, job.rule, job.grid,
                                            job.initial, job.vol, noise, job.scheme,
                                            record_increments));
        });
      });

  GenerateResult result;
  result.ensemble.params = job.params;
  result.ensemble.grid = job.grid;
  result.ensemble.scheme = job.scheme;
  result.ensemble.master_seed = job.master_seed;
  result.ensemble.paths.reserve(static_cast<std::size_t>(job.n_paths));
  for (auto& partial : partials) {
    for (auto& path : partial.paths) {
      result.ensemble.paths.push_back(std::move(path));
    }
    result.failures.insert(result.failures.end(), partial.failures.begin(),
                           partial.failures.end());
  }
  return result;
}

MomentRunResult run_moments(const SimulationJob& job, double p, bool inverse,
                            int threads) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("run_moments: p must be >= 2");
  }
  if (inverse) {
    const double floor = std::max(2.0, job.params.rho - 1.0);
    if (!(p > floor)) {
      std::ostringstream os;
      os << "run_moments: inverse moments need p > max(2, rho - 1) = " << floor;
      throw std::invalid_argument(os.str());
    }
  }

  const auto m = static_cast<std::size_t>(job.grid.steps_per_delay);
  const auto n = static_cast<std::size_t>(job.grid.n_steps);
  const std::size_t n_times = n + 1;

  struct Partial {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::int64_t used = 0;
    std::int64_t excluded = 0;
    std::vector<FailedPath> failures;
  };

  const int nt = resolve_threads(threads);
  auto partials = run_blocks<Partial>(
      job.n_paths, nt, [&](std::int64_t begin, std::int64_t end, Partial& out) {
        out.sum.assign(n_times, 0.0);
        out.sumsq.assign(n_times, 0.0);
        paths_in_block(begin, end, out.failures, [&](std::uint64_t idx) {
          const NoiseStream noise(job.master_seed, idx, job.grid.delta(),
                                  job.params.lambda);
          const SimPath path = simulate_path(job.params, job.rule, job.grid,
                                             job.initial, job.vol, noise, job.scheme);
          if (inverse) {
            for (std::size_t k = 0; k <= n; ++k) {
              if (!(path.states[m + k] > 0.0)) {
                ++out.excluded;
                return;
              }
            }
          }
          for (std::size_t k = 0; k <= n; ++k) {
            const double x = path.states[m + k];
            const double y = inverse ? std::pow(x, -p) : std::pow(std::fabs(x), p);
            out.sum[k] += y;
            out.sumsq[k] += y * y;
          }
          ++out.used;
        });
      });

  MomentRunResult result;
  MomentReport& rep = result.report;
  rep.p = p;
  rep.inverse = inverse;
  rep.times.resize(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    rep.times[k] = job.grid.time_at(static_cast<std::int64_t>(k));
  }
  std::vector<double> sum(n_times, 0.0);
  std::vector<double> sumsq(n_times, 0.0);
  for (const auto& partial : partials) {
    for (std::size_t k = 0; k < n_times; ++k) {
      sum[k] += partial.sum[k];
      sumsq[k] += partial.sumsq[k];
    }
    rep.n_paths_used += partial.used;
    rep.n_paths_excluded += partial.excluded;
    result.failures.insert(result.failures.end(), partial.failures.begin(),
                           partial.failures.end());
  }

  if (rep.n_paths_used < kMinUsablePaths) {
    std::ostringstream os;
    os << "run_moments: only " << rep.n_paths_used
       << " usable paths (need at least " << kMinUsablePaths << ")";
    throw numerical_error(os.str());
  }
  rep.estimates.resize(n_times);
  rep.ci_halfwidths.resize(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    rep.estimates[k] = sum[k] / static_cast<double>(rep.n_paths_used);
    rep.ci_halfwidths[k] = mean_halfwidth(sum[k], sumsq[k], rep.n_paths_used);
  }
  rep.sup_estimate = *std::max_element(rep.estimates.begin(), rep.estimates.end());
  return result;
}

ConvergenceRunResult run_convergence(const SimulationJob& fine_job,
                                     std::span<const int> refine_log2s, double p,
                                     int threads) {
  if (!(p >= 2.0 && p <= 8.0)) {
    throw std::invalid_argument("run_convergence: p must lie in [2, 8]");
  }
  if (refine_log2s.empty()) {
    throw std::invalid_argument("run_convergence: no rungs given");
  }
  const std::size_t n_rungs = refine_log2s.size();
  std::vector<GridSpec> coarse_grids;
  coarse_grids.reserve(n_rungs);
  for (const int r : refine_log2s) {
    if (r < 1) {
      throw config_error("run_convergence: each rung must coarsen the "
                         "reference grid (refine_log2 >= 1)");
    }
    coarse_grids.push_back(coarsen_grid(fine_job.grid, r));
  }

  const auto mf = static_cast<std::size_t>(fine_job.grid.steps_per_delay);

  struct Partial {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::int64_t used = 0;
    std::vector<FailedPath> failures;
  };

  const int nt = resolve_threads(threads);
  auto partials = run_blocks<Partial>(
      fine_job.n_paths, nt, [&](std::int64_t begin, std::int64_t end, Partial& out) {
        out.sum.assign(n_rungs, 0.0);
        out.sumsq.assign(n_rungs, 0.0);
        std::vector<double> coarse_dB;
        std::vector<std::int64_t> coarse_dN;
        std::vector<double> sups(n_rungs);
        paths_in_block(begin, end, out.failures, [&](std::uint64_t idx) {
          const NoiseStream noise(fine_job.master_seed, idx, fine_job.grid.delta(),
                                  fine_job.params.lambda);
          const SimPath fine =
              simulate_path(fine_job.params, fine_job.rule, fine_job.grid,
                            fine_job.initial, fine_job.vol, noise, fine_job.scheme,
                            /*record_increments=*/true);
          for (std::size_t j = 0; j < n_rungs; ++j) {
            aggregate_increments(fine.brownian, fine.poisson, refine_log2s[j],
                                 coarse_dB, coarse_dN);
            const SimPath coarse = simulate_path_with_increments(
                fine_job.params, fine_job.rule, coarse_grids[j], fine_job.initial,
                fine_job.vol, fine_job.scheme, coarse_dB, coarse_dN, idx);
            const auto mc = static_cast<std::size_t>(coarse_grids[j].steps_per_delay);
            const auto nc = static_cast<std::size_t>(coarse_grids[j].n_steps);
            const std::size_t ratio = std::size_t{1} << refine_log2s[j];
            double sup = 0.0;
            for (std::size_t k = 0; k <= nc; ++k) {
              const double d =
                  std::fabs(coarse.states[mc + k] - fine.states[mf + k * ratio]);
              sup = std::max(sup, d);
            }
            sups[j] = sup;
          }
          // Commit only after every rung succeeded, so a failed path leaves
          // no partial contribution behind.
          for (std::size_t j = 0; j < n_rungs; ++j) {
            const double y = std::pow(sups[j], p);
            out.sum[j] += y;
            out.sumsq[j] += y * y;
          }
          ++out.used;
        });
      });

  std::vector<double> sum(n_rungs, 0.0);
  std::vector<double> sumsq(n_rungs, 0.0);
  std::int64_t used = 0;
  ConvergenceRunResult result;
  for (const auto& partial : partials) {
    for (std::size_t j = 0; j < n_rungs; ++j) {
      sum[j] += partial.sum[j];
      sumsq[j] += partial.sumsq[j];
    }
    used += partial.used;
    result.failures.insert(result.failures.end(), partial.failures.begin(),
                           partial.failures.end());
  }
  if (used < 1) {
    throw numerical_error("run_convergence: every path failed");
  }

  std::vector<double> deltas(n_rungs);
  std::vector<double> errors(n_rungs);
  for (std::size_t j = 0; j < n_rungs; ++j) {
    result.points.push_back(strong_error_point_from_sums(coarse_grids[j].delta(), p,
                                                         sum[j], sumsq[j], used));
    deltas[j] = result.points[j].delta;
    errors[j] = result.points[j].error;
  }
  if (n_rungs >= 3 &&
      std::all_of(errors.begin(), errors.end(), [](double e) { return e > 0.0; })) {
    result.fit = fit_convergence_order(deltas, errors);
  }
  return result;
}

ComparisonRunResult run_scheme_comparison(const SimulationJob& job, Scheme scheme_a,
                                          Scheme scheme_b, int threads) {
  const auto n = static_cast<std::size_t>(job.grid.n_steps);
  const auto m = static_cast<std::size_t>(job.grid.steps_per_delay);
  const std::size_t n_times = n + 1;

  struct Partial {
    std::vector<double> sum_abs;
    std::vector<double> sum_sq;
    std::vector<double> max_abs;
    double sup_sum = 0.0;
    double sup_sumsq = 0.0;
    double sup_max = 0.0;
    std::int64_t used = 0;
    std::vector<FailedPath> failures;
  };

  const int nt = resolve_threads(threads);
  auto partials = run_blocks<Partial>(
      job.n_paths, nt, [&](std::int64_t begin, std::int64_t end, Partial& out) {
        out.sum_abs.assign(n_times, 0.0);
        out.sum_sq.assign(n_times, 0.0);
        out.max_abs.assign(n_times, 0.0);
        std::vector<double> dB;
        std::vector<std::int64_t> dN;
        paths_in_block(begin, end, out.failures, [&](std::uint64_t idx) {
          const NoiseStream noise(job.master_seed, idx, job.grid.delta(),
                                  job.params.lambda);
          fill_increments(noise, job.grid.n_steps, dB, dN);
          const SimPath pa = simulate_path_with_increments(
              job.params, job.rule, job.grid, job.initial, job.vol, scheme_a, dB,
              dN, idx);
          const SimPath pb = simulate_path_with_increments(
              job.params, job.rule, job.grid, job.initial, job.vol, scheme_b, dB,
              dN, idx);
          double sup = 0.0;
          for (std::size_t k = 0; k < n_times; ++k) {
            const double d = std::fabs(pa.states[m + k] - pb.states[m + k]);
            out.sum_abs[k] += d;
            out.sum_sq[k] += d * d;
            out.max_abs[k] = std::max(out.max_abs[k], d);
            sup = std::max(sup, d);
          }
          out.sup_sum += sup;
          out.sup_sumsq += sup * sup;
          out.sup_max = std::max(out.sup_max, sup);
          ++out.used;
        });
      });

  ComparisonRunResult result;
  SchemeComparison& cmp = result.comparison;
  cmp.times.resize(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    cmp.times[k] = job.grid.time_at(static_cast<std::int64_t>(k));
  }
  cmp.mean_abs_diff.assign(n_times, 0.0);
  cmp.rms_diff.assign(n_times, 0.0);
  cmp.max_abs_diff.assign(n_times, 0.0);
  double sup_sum = 0.0;
  double sup_sumsq = 0.0;
  for (const auto& partial : partials) {
    for (std::size_t k = 0; k < n_times; ++k) {
      cmp.mean_abs_diff[k] += partial.sum_abs[k];
      cmp.rms_diff[k] += partial.sum_sq[k];
      cmp.max_abs_diff[k] = std::max(cmp.max_abs_diff[k], partial.max_abs[k]);
    }
    sup_sum += partial.sup_sum;
    sup_sumsq += partial.sup_sumsq;
    cmp.max_sup_diff = std::max(cmp.max_sup_diff, partial.sup_max);
    cmp.n_paths += partial.used;
    result.failures.insert(result.failures.end(), partial.failures.begin(),
                           partial.failures.end());
  }
  if (cmp.n_paths < 1) {
    throw numerical_error("run_scheme_comparison: every path failed");
  }
  for (std::size_t k = 0; k < n_times; ++k) {
    cmp.mean_abs_diff[k] /= static_cast<double>(cmp.n_paths);
    cmp.rms_diff[k] = std::sqrt(cmp.rms_diff[k] / static_cast<double>(cmp.n_paths));
  }
  cmp.mean_sup_diff = sup_sum / static_cast<double>(cmp.n_paths);
  cmp.rms_sup_diff = std::sqrt(sup_sumsq / static_cast<double>(cmp.n_paths));
  return result;
}

PricingRunResult run_pricing(const SimulationJob& fine_job,
                             std::span<const int> refine_log2s,
                             const std::optional<BondSpec>& bond,
                             const std::optional<BarrierOptionSpec>& barrier,
                             int threads) {
  if (!bond.has_value() && !barrier.has_value()) {
    throw config_error("run_pricing: no instrument configured");
  }
  if (refine_log2s.empty()) {
    throw std::invalid_argument("run_pricing: no rungs given");
  }
  const std::size_t n_rungs = refine_log2s.size();
  std::vector<GridSpec> grids;
  std::vector<std::int64_t> bond_steps(n_rungs, 0);
  std::vector<std::int64_t> barrier_steps(n_rungs, 0);
  for (std::size_t j = 0; j < n_rungs; ++j) {
    if (refine_log2s[j] < 0) {
      throw config_error("run_pricing: refinement exponents must be >= 0");
    }
    grids.push_back(coarsen_grid(fine_job.grid, refine_log2s[j]));
    if (bond.has_value()) {
      bond_steps[j] = steps_to_horizon(grids[j], bond->maturity);
    }
    if (barrier.has_value()) {
      if (!(barrier->strike >= 0.0) || !std::isfinite(barrier->strike)) {
        throw config_error("barrier option strike must be nonnegative");
      }
      if (barrier->barrier.has_value() &&
          (!(*barrier->barrier > 0.0) || !std::isfinite(*barrier->barrier))) {
        throw config_error("barrier level must be positive (omit it for an "
                           "unmonitored contract)");
      }
      barrier_steps[j] = steps_to_horizon(grids[j], barrier->expiry);
    }
  }

  struct Partial {
    std::vector<double> bond_sum, bond_sumsq;
    std::vector<double> barr_sum, barr_sumsq;
    std::int64_t used = 0;
    std::vector<FailedPath> failures;
  };

  const int nt = resolve_threads(threads);
  auto partials = run_blocks<Partial>(
      fine_job.n_paths, nt, [&](std::int64_t begin, std::int64_t end, Partial& out) {
        out.bond_sum.assign(n_rungs, 0.0);
        out.bond_sumsq.assign(n_rungs, 0.0);
        out.barr_sum.assign(n_rungs, 0.0);
        out.barr_sumsq.assign(n_rungs, 0.0);
        std::vector<double> dB, coarse_dB;
        std::vector<std::int64_t> dN, coarse_dN;
        std::vector<double> bond_vals(n_rungs), barr_vals(n_rungs);
        paths_in_block(begin, end, out.failures, [&](std::uint64_t idx) {
          const NoiseStream noise(fine_job.master_seed, idx, fine_job.grid.delta(),
                                  fine_job.params.lambda);
          fill_increments(noise, fine_job.grid.n_steps, dB, dN);
          for (std::size_t j = 0; j < n_rungs; ++j) {
            aggregate_increments(dB, dN, refine_log2s[j], coarse_dB, coarse_dN);
            const SimPath path = simulate_path_with_increments(
                fine_job.params, fine_job.rule, grids[j], fine_job.initial,
                fine_job.vol, fine_job.scheme, coarse_dB, coarse_dN, idx);
            bond_vals[j] = bond.has_value() ? bond_discount_factor(path, bond_steps[j]) : 0.0;
            barr_vals[j] = barrier.has_value()
                               ? barrier_payoff(path, barrier_steps[j],
                                                barrier->strike, barrier->barrier)
                               : 0.0;
          }
          for (std::size_t j = 0; j < n_rungs; ++j) {
            out.bond_sum[j] += bond_vals[j];
            out.bond_sumsq[j] += bond_vals[j] * bond_vals[j];
            out.barr_sum[j] += barr_vals[j];
            out.barr_sumsq[j] += barr_vals[j] * barr_vals[j];
          }
          ++out.used;
        });
      });

  std::vector<double> bond_sum(n_rungs, 0.0), bond_sumsq(n_rungs, 0.0);
  std::vector<double> barr_sum(n_rungs, 0.0), barr_sumsq(n_rungs, 0.0);
  std::int64_t used = 0;
  PricingRunResult result;
  for (const auto& partial : partials) {
    for (std::size_t j = 0; j < n_rungs; ++j) {
      bond_sum[j] += partial.bond_sum[j];
      bond_sumsq[j] += partial.bond_sumsq[j];
      barr_sum[j] += partial.barr_sum[j];
      barr_sumsq[j] += partial.barr_sumsq[j];
    }
    used += partial.used;
    result.failures.insert(result.failures.end(), partial.failures.begin(),
                           partial.failures.end());
  }
  if (used < 1) {
    throw numerical_error("run_pricing: every path failed");
  }

  for (std::size_t j = 0; j < n_rungs; ++j) {
    if (bond.has_value()) {
      PriceEstimate est;
      est.instrument = "bond";
      est.delta = grids[j].delta();
      est.n_paths = used;
      est.value = bond_sum[j] / static_cast<double>(used);
      const double hw = mean_halfwidth(bond_sum[j], bond_sumsq[j], used);
      est.ci_lo = est.value - hw;
      est.ci_hi = est.value + hw;
      result.estimates.push_back(est);
    }
    if (barrier.has_value()) {
      PriceEstimate est;
      est.instrument = "barrier";
      est.delta = grids[j].delta();
      est.n_paths = used;
      est.value = barr_sum[j] / static_cast<double>(used);
      const double hw = mean_halfwidth(barr_sum[j], barr_sumsq[j], used);
      est.ci_lo = est.value - hw;
      est.ci_hi = est.value + hw;
      result.estimates.push_back(est);
    }
  }
  return result;
}

}  // namespace sddemc
