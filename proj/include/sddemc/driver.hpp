#pragma once

// Command layer shared by the CLI and the tests. Each command loads its
// parameters from an ExperimentConfig, runs the engine, and writes CSV
// artifacts plus a manifest.json (config hash, seed, library version,
// step-admissibility warnings, failures, command-specific results) into the
// output directory. Nothing here depends on wall time or machine identity,
// so outputs are byte-identical across reruns and thread counts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sddemc/config.hpp"

namespace sddemc {

struct DriverOptions {
  // Overrides the config's output directory when non-empty.
  std::filesystem::path out_dir;
  // Replaces the config seed; recorded in the manifest as seed_overridden.
  std::optional<std::uint64_t> seed_override;
  // Worker threads; < 1 means all available. Never affects output bytes.
  int threads = 0;
};

// One per-path CSV per configured scheme, plus manifest.json.
void cmd_simulate(const ExperimentConfig& cfg, const DriverOptions& opt);

// Coupled strong-error ladder against the reference grid: convergence.csv
// (delta,error,ci_lo,ci_hi) plus fitted slope and an errors_decreasing flag
// in manifest.json. Requires a ladder with at least 3 rungs, all strictly
// coarser than the reference.
void cmd_converge(const ExperimentConfig& cfg, const DriverOptions& opt);

// Empirical p-th (or inverse p-th) moments over time: moments.csv plus the
// sup-over-time estimate in manifest.json.
void cmd_moments(const ExperimentConfig& cfg, const DriverOptions& opt);

// Monte Carlo bond / barrier-option values per configured step size:
// prices.csv plus manifest.json. Requires the pricing block.
void cmd_price(const ExperimentConfig& cfg, const DriverOptions& opt);

// Loads the config, applies the options, dispatches to the command, and maps
// exceptions to exit codes: 0 success, 2 config error, 3 numerical failure,
// 1 anything else. Messages go to stderr.
int run_command(const std::string& command,
                const std::filesystem::path& config_file,
                const DriverOptions& opt);

}  // namespace sddemc
