#include "sddemc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sddemc/errors.hpp"
#include "sddemc/stats.hpp"

namespace sddemc {

namespace {

constexpr std::int64_t kMinUsablePaths = 100;

// Indices of the paths sorted by path_index, so reductions are invariant
// under reordering of the stored ensemble.
std::vector<std::size_t> sorted_order(const std::vector<SimPath>& paths) {
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return paths[a].path_index < paths[b].path_index;
  });
  return order;
}

}  // namespace

MomentReport estimate_moments(const Ensemble& ensemble, double p, bool inverse) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("estimate_moments: p must be >= 2");
  }
  if (inverse) {
    const double floor = std::max(2.0, ensemble.params.rho - 1.0);
    if (!(p > floor)) {
      std::ostringstream os;
      os << "estimate_moments: inverse moments need p > max(2, rho - 1) = "
         << floor;
      throw std::invalid_argument(os.str());
    }
  }

  const auto m = static_cast<std::size_t>(ensemble.grid.steps_per_delay);
  const auto n = static_cast<std::size_t>(ensemble.grid.n_steps);
  const std::size_t n_times = n + 1;

  MomentReport rep;
  rep.p = p;
  rep.inverse = inverse;
  rep.times.resize(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    rep.times[k] = ensemble.grid.time_at(static_cast<std::int64_t>(k));
  }

  std::vector<double> sum(n_times, 0.0);
  std::vector<double> sumsq(n_times, 0.0);

  for (const std::size_t idx : sorted_order(ensemble.paths)) {
    const SimPath& path = ensemble.paths[idx];
    if (!(path.grid == ensemble.grid)) {
      throw std::invalid_argument("estimate_moments: path grid does not match "
                                  "the ensemble grid");
    }
    if (inverse) {
      bool positive = true;
      for (std::size_t k = 0; k <= n && positive; ++k) {
        positive = path.states[m + k] > 0.0;
      }
      if (!positive) {
        ++rep.n_paths_excluded;
        continue;
      }
    }
    for (std::size_t k = 0; k <= n; ++k) {
      const double x = path.states[m + k];
      const double y = inverse ? std::pow(x, -p) : std::pow(std::fabs(x), p);
      sum[k] += y;
      sumsq[k] += y * y;
    }
    ++rep.n_paths_used;
  }

  if (rep.n_paths_used < kMinUsablePaths) {
    std::ostringstream os;
    os << "estimate_moments: only " << rep.n_paths_used
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
  return rep;
}

StrongErrorPoint estimate_strong_error(const CoupledEnsemble& ensemble, double p) {
  if (!(p >= 2.0 && p <= 8.0)) {
    throw std::invalid_argument("estimate_strong_error: p must lie in [2, 8]");
  }
  if (ensemble.pairs.empty()) {
    throw std::invalid_argument("estimate_strong_error: empty ensemble");
  }

  const auto mc = static_cast<std::size_t>(ensemble.coarse_grid.steps_per_delay);
  const auto mf = static_cast<std::size_t>(ensemble.fine_grid.steps_per_delay);
  const auto nc = static_cast<std::size_t>(ensemble.coarse_grid.n_steps);
  const std::size_t r = std::size_t{1} << ensemble.refine_log2;

  std::vector<std::size_t> order(ensemble.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ensemble.pairs[a].fine.path_index < ensemble.pairs[b].fine.path_index;
  });

  double sum = 0.0;
  double sumsq = 0.0;
  for (const std::size_t idx : order) {
    const CoupledPair& pair = ensemble.pairs[idx];
    if (!(pair.coarse.grid == ensemble.coarse_grid) ||
        !(pair.fine.grid == ensemble.fine_grid) ||
        pair.refine_log2 != ensemble.refine_log2 ||
        pair.coarse.path_index != pair.fine.path_index) {
      throw std::invalid_argument("estimate_strong_error: pair does not match "
                                  "the ensemble's coupled grids");
    }
    double sup = 0.0;
    for (std::size_t j = 0; j <= nc; ++j) {
      const double d =
          std::fabs(pair.coarse.states[mc + j] - pair.fine.states[mf + j * r]);
      sup = std::max(sup, d);
    }
    const double y = std::pow(sup, p);
    sum += y;
    sumsq += y * y;
  }

  return strong_error_point_from_sums(ensemble.coarse_grid.delta(), p, sum, sumsq,
                                      static_cast<std::int64_t>(ensemble.pairs.size()));
}

StrongErrorPoint strong_error_point_from_sums(double coarse_delta, double p,
                                              double sum, double sumsq,
                                              std::int64_t n_paths) {
  if (n_paths < 1) {
    throw std::invalid_argument("strong_error_point_from_sums: no paths");
  }
  const double mean = sum / static_cast<double>(n_paths);
  const double hw = mean_halfwidth(sum, sumsq, n_paths);
  StrongErrorPoint pt;
  pt.delta = coarse_delta;
  pt.p = p;
  pt.n_paths = n_paths;
  pt.error = std::pow(mean, 1.0 / p);
  pt.ci_lo = std::pow(std::max(mean - hw, 0.0), 1.0 / p);
  pt.ci_hi = std::pow(mean + hw, 1.0 / p);
  return pt;
}

ConvergenceFit fit_convergence_order(std::span<const double> deltas,
                                     std::span<const double> errors) {
  if (deltas.size() != errors.size()) {
    throw std::invalid_argument("fit_convergence_order: deltas and errors must "
                                "have the same length");
  }
  if (deltas.size() < 3) {
    throw std::invalid_argument("fit_convergence_order: need at least 3 points");
  }
  const std::size_t n = deltas.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !std::isfinite(deltas[i])) {
      throw std::invalid_argument("fit_convergence_order: step sizes must be positive");
    }
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw numerical_error("fit_convergence_order: degenerate fit, every error "
                            "must be strictly positive");
    }
    xs[i] = std::log(deltas[i]);
    ys[i] = std::log(errors[i]);
  }
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) {
    throw numerical_error("fit_convergence_order: degenerate fit, step sizes "
                          "must not all coincide");
  }
  ConvergenceFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ys[i] - (fit.intercept + fit.slope * xs[i]);
  }
  return fit;
}

SchemeComparison compare_schemes(const Ensemble& a, const Ensemble& b) {
  if (a.master_seed != b.master_seed) {
    throw std::invalid_argument("compare_schemes: ensembles must share the "
                                "master seed (shared noise)");
  }
  if (!(a.grid == b.grid)) {
    throw std::invalid_argument("compare_schemes: ensembles must share the grid");
  }
  if (a.paths.size() != b.paths.size() || a.paths.empty()) {
    throw std::invalid_argument("compare_schemes: ensembles must hold the same "
                                "nonempty path set");
  }

  const auto order_a = sorted_order(a.paths);
  const auto order_b = sorted_order(b.paths);

  const auto m = static_cast<std::size_t>(a.grid.steps_per_delay);
  const auto n = static_cast<std::size_t>(a.grid.n_steps);
  const std::size_t n_times = n + 1;
  const auto n_paths = static_cast<std::int64_t>(a.paths.size());

  SchemeComparison cmp;
  cmp.n_paths = n_paths;
  cmp.times.resize(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    cmp.times[k] = a.grid.time_at(static_cast<std::int64_t>(k));
  }
  cmp.mean_abs_diff.assign(n_times, 0.0);
  cmp.rms_diff.assign(n_times, 0.0);
  cmp.max_abs_diff.assign(n_times, 0.0);

  double sup_sum = 0.0;
  double sup_sumsq = 0.0;
  for (std::size_t i = 0; i < order_a.size(); ++i) {
    const SimPath& pa = a.paths[order_a[i]];
    const SimPath& pb = b.paths[order_b[i]];
    if (pa.path_index != pb.path_index) {
      throw std::invalid_argument("compare_schemes: ensembles must hold the "
                                  "same path indices");
    }
    double sup = 0.0;
    for (std::size_t k = 0; k < n_times; ++k) {
      const double d = std::fabs(pa.states[m + k] - pb.states[m + k]);
      cmp.mean_abs_diff[k] += d;
      cmp.rms_diff[k] += d * d;
      cmp.max_abs_diff[k] = std::max(cmp.max_abs_diff[k], d);
      sup = std::max(sup, d);
    }
    sup_sum += sup;
    sup_sumsq += sup * sup;
    cmp.max_sup_diff = std::max(cmp.max_sup_diff, sup);
  }
  for (std::size_t k = 0; k < n_times; ++k) {
    cmp.mean_abs_diff[k] /= static_cast<double>(n_paths);
    cmp.rms_diff[k] = std::sqrt(cmp.rms_diff[k] / static_cast<double>(n_paths));
  }
  cmp.mean_sup_diff = sup_sum / static_cast<double>(n_paths);
  cmp.rms_sup_diff = std::sqrt(sup_sumsq / static_cast<double>(n_paths));
  return cmp;
}

}  // namespace sddemc
