#pragma once

// Experiment configuration: a single JSON file with nested blocks (model,
// volatility, initial, truncation, grid, run, pricing, output). Rejection
// messages always carry the offending field path. The seed is mandatory —
// there is no nondeterministic default — so every run is reproducible from
// its config file alone.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sddemc/model.hpp"
#include "sddemc/path.hpp"
#include "sddemc/pricing.hpp"
#include "sddemc/truncation.hpp"

namespace sddemc {

struct ExperimentConfig {
  ModelParams params;  // tau copied from the grid block
  VolatilityFunction vol;
  InitialSegment initial;
  double initial_value = 0.0;  // the configured constant initial level
  double pi_exponent = 2.0 / 3.0;

  double tau = 1.0;
  double horizon = 1.0;
  // Single-grid commands use steps_per_delay. Ladder commands (converge,
  // price) use ladder/reference_steps: each ladder entry is an M whose grid
  // is obtained by merging steps of the reference grid (power-of-two ratio).
  std::int64_t steps_per_delay = 0;
  std::vector<std::int64_t> ladder;
  std::int64_t reference_steps = 0;

  std::uint64_t seed = 0;
  std::int64_t n_paths = 0;
  std::vector<Scheme> schemes;
  double p = 2.0;
  bool inverse_moments = false;
  double max_failed_fraction = 0.0;

  std::optional<BondSpec> bond;
  std::optional<BarrierOptionSpec> barrier;

  std::string output_dir = "out";

  // Canonical (sorted-key) serialization of the parsed file, used for the
  // manifest hash.
  std::string canonical_text;
};

// Parses and validates a config from JSON text. Throws config_error with a
// field-path message on any violation.
ExperimentConfig parse_config(const std::string& json_text);

// Reads the file and delegates to parse_config.
ExperimentConfig load_config(const std::filesystem::path& file);

// FNV-1a 64-bit hash of the canonical config text, in fixed-width hex.
std::string config_hash(const std::string& canonical_text);

// Step sizes the given config can run: tau/M for the single grid or for
// every ladder rung plus the reference.
std::vector<double> configured_deltas(const ExperimentConfig& cfg);

// Refinement exponents log2(reference/rung), in ladder order. Valid only
// when the ladder is present.
std::vector<int> ladder_refine_exponents(const ExperimentConfig& cfg);

}  // namespace sddemc
