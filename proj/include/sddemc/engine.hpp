#pragma once

// Fused simulate-and-reduce drivers. Paths are processed in fixed blocks of
// consecutive path indices; each block accumulates its own partial statistics
// and the partials are merged in block order afterwards. Because the noise is
// counter-based and the block layout is fixed, every result is byte-identical
// for any thread count, including a single thread — parallelism only changes
// wall time. Paths whose stepper fails (numerical_error) are recorded and
// excluded deterministically; anything else (config errors, precondition
// violations) aborts the run.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sddemc/analysis.hpp"
#include "sddemc/ensemble.hpp"
#include "sddemc/pricing.hpp"

namespace sddemc {

struct SimulationJob {
  ModelParams params;
  TruncationRule rule;
  GridSpec grid;
  InitialSegment initial;
  VolatilityFunction vol;
  Scheme scheme = Scheme::TEM;
  std::uint64_t master_seed = 0;
  std::int64_t n_paths = 0;
  double max_failed_fraction = 0.0;
};

struct FailedPath {
  std::uint64_t path_index = 0;
  std::string reason;
};

// Thread-count resolution: values < 1 mean "all available".
int resolve_threads(int threads);

// Throws numerical_error when the failed fraction exceeds the job's tolerance.
void enforce_failure_tolerance(const SimulationJob& job,
                               const std::vector<FailedPath>& failures);

struct GenerateResult {
  Ensemble ensemble;  // successful paths, in path-index order
  std::vector<FailedPath> failures;
};

GenerateResult generate_ensemble(const SimulationJob& job, int threads,
                                 bool record_increments);

struct MomentRunResult {
  MomentReport report;
  std::vector<FailedPath> failures;
};

MomentRunResult run_moments(const SimulationJob& job, double p, bool inverse,
                            int threads);

struct ConvergenceRunResult {
  std::vector<StrongErrorPoint> points;  // one per rung, in the given order
  std::optional<ConvergenceFit> fit;     // present when >= 3 rungs fit cleanly
  std::vector<FailedPath> failures;
};

// Strong-error ladder against the job's grid as the fine reference. Each
// rung coarsens the reference by 2^refine_log2s[i]; all rungs of one path are
// driven by the same fine-grid noise.
ConvergenceRunResult run_convergence(const SimulationJob& fine_job,
                                     std::span<const int> refine_log2s, double p,
                                     int threads);

struct ComparisonRunResult {
  SchemeComparison comparison;
  std::vector<FailedPath> failures;
};

// Runs two schemes on identical increments, path by path.
ComparisonRunResult run_scheme_comparison(const SimulationJob& job, Scheme scheme_a,
                                          Scheme scheme_b, int threads);

struct PricingRunResult {
  std::vector<PriceEstimate> estimates;  // per rung: bond row, then barrier row
  std::vector<FailedPath> failures;
};

// Prices the configured instruments on every rung of the coupled ladder
// (refine_log2 = 0 is the job grid itself). Coupling across rungs makes the
// price differences between successive steps a meaningful convergence
// diagnostic.
PricingRunResult run_pricing(const SimulationJob& fine_job,
                             std::span<const int> refine_log2s,
                             const std::optional<BondSpec>& bond,
                             const std::optional<BarrierOptionSpec>& barrier,
                             int threads);

}  // namespace sddemc
