#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sddemc/analysis.hpp"
#include "sddemc/path.hpp"
#include "sddemc/pricing.hpp"

namespace sddemc {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

// Lowercase scheme tag + zero-padded path index, e.g. "tem_path_00042.csv".
std::string path_csv_filename(Scheme scheme, std::uint64_t path_index);

// One row per grid node, header "k,t,x,dB,dN". k runs from -M (start of the
// initial segment) through n_steps; increments are written as 0 outside the
// simulated window [0, n_steps). Requires a path recorded with increments.
void write_path_csv(const std::filesystem::path& file, const SimPath& path);

// Header "delta,error,ci_lo,ci_hi", one row per step size.
void write_convergence_csv(const std::filesystem::path& file,
                           const std::vector<StrongErrorPoint>& points);

// Header "t,estimate,ci_halfwidth", one row per grid time.
void write_moments_csv(const std::filesystem::path& file, const MomentReport& report);

// Header "instrument,delta,n_paths,value,ci_lo,ci_hi".
void write_prices_csv(const std::filesystem::path& file,
                      const std::vector<PriceEstimate>& estimates);

}  // namespace sddemc
