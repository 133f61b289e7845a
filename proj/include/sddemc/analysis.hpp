#pragma once

// Serial reference estimators over materialized ensembles. Every reduction
// iterates paths in path_index order (after an explicit sort of the index
// permutation), so results do not depend on the order in which paths were
// generated or stored. Confidence intervals are normal-approximation 95%
// intervals.

#include <cstdint>
#include <span>
#include <vector>

#include "sddemc/ensemble.hpp"

namespace sddemc {

struct MomentReport {
  double p = 2.0;
  bool inverse = false;
  std::vector<double> times;          // t_k for k = 0..n_steps
  std::vector<double> estimates;      // E|x(t_k)|^p (or E|1/x(t_k)|^p)
  std::vector<double> ci_halfwidths;  // 95% normal-approximation halfwidths
  double sup_estimate = 0.0;          // max over times
  std::int64_t n_paths_used = 0;
  std::int64_t n_paths_excluded = 0;  // inverse mode: paths touching (-inf, 0]
};

// Monte Carlo moment curves t -> E|x(t)|^p. Requires p >= 2; inverse mode
// additionally requires p > max(2, rho - 1) and drops (and counts) paths with
// any nonpositive state. Fewer than 100 usable paths is an error
// (numerical_error), as the normal-approximation intervals become meaningless.
MomentReport estimate_moments(const Ensemble& ensemble, double p, bool inverse);

struct StrongErrorPoint {
  double delta = 0.0;  // coarse step size
  double error = 0.0;  // (E[sup_k |coarse - fine|^p])^(1/p), sup over coarse grid
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p = 2.0;
  std::int64_t n_paths = 0;
};

// Strong error of the coarse paths against their coupled fine references.
// The sup runs over the coarse grid points in [0, T]. Requires 2 <= p <= 8.
StrongErrorPoint estimate_strong_error(const CoupledEnsemble& ensemble, double p);

// Assembles a strong-error point from accumulated per-path sup^p sums (used
// by both the reference estimator and the fused engine drivers).
StrongErrorPoint strong_error_point_from_sums(double coarse_delta, double p,
                                              double sum, double sumsq,
                                              std::int64_t n_paths);

struct ConvergenceFit {
  double slope = 0.0;      // least-squares slope of log(error) vs log(delta)
  double intercept = 0.0;  // fitted intercept (log of the error constant)
  std::vector<double> residuals;
};

// Log-log least-squares fit. Needs at least 3 points, strictly positive
// errors (a zero error makes the fit degenerate: numerical_error) and at
// least two distinct step sizes.
ConvergenceFit fit_convergence_order(std::span<const double> deltas,
                                     std::span<const double> errors);

struct SchemeComparison {
  std::vector<double> times;          // t_k for k = 0..n_steps
  std::vector<double> mean_abs_diff;  // per time, over paths
  std::vector<double> rms_diff;
  std::vector<double> max_abs_diff;
  double mean_sup_diff = 0.0;  // stats of per-path sup_k |a - b|
  double rms_sup_diff = 0.0;
  double max_sup_diff = 0.0;
  std::int64_t n_paths = 0;
};

// Pathwise distance between two ensembles driven by the same noise: both
// must share the master seed, the grid and the path-index set (the whole
// point is that corresponding paths saw identical increments).
SchemeComparison compare_schemes(const Ensemble& a, const Ensemble& b);

}  // namespace sddemc
