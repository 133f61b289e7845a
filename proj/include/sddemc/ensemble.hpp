#pragma once

// Materialized collections of simulated paths. The estimators in
// analysis.hpp consume these; the fused drivers in engine.hpp produce the
// same statistics without keeping every path in memory.

#include <cstdint>
#include <vector>

#include "sddemc/grid.hpp"
#include "sddemc/model.hpp"
#include "sddemc/path.hpp"

namespace sddemc {

struct Ensemble {
  ModelParams params;
  GridSpec grid;
  Scheme scheme = Scheme::TEM;
  std::uint64_t master_seed = 0;
  std::vector<SimPath> paths;
};

struct CoupledEnsemble {
  ModelParams params;
  GridSpec fine_grid;
  GridSpec coarse_grid;
  int refine_log2 = 0;
  std::uint64_t master_seed = 0;
  std::vector<CoupledPair> pairs;
};

}  // namespace sddemc
