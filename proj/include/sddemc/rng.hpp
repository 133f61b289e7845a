#pragma once

// Counter-based noise generation. Every increment consumed by a path is a
// pure function of (master_seed, path_index, step, substream), so paths can
// be produced in any order, on any number of threads, or regenerated in
// isolation, and always come out bit-identical.
//
// The block cipher underneath is Philox4x32-10; the unit tests pin it to the
// published known-answer vectors.

#include <array>
#include <cstdint>

namespace sddemc {

using PhiloxCtr = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// One 10-round Philox4x32 block: 128-bit counter + 64-bit key -> 128 bits.
PhiloxCtr philox4x32_10(PhiloxCtr ctr, PhiloxKey key);

// Inverse standard-normal CDF on (0, 1), accurate to full double precision
// (rational approximations on three regimes of the tail variable).
double inverse_normal_cdf(double u);

// Poisson quantile by CDF inversion; intended for mean <= 10 where the
// partial sums converge in a few dozen terms. u must lie in (0, 1).
long poisson_inverse(double u, double mean);

// Substream tags keep the Brownian and Poisson draws of the same step on
// distinct counter blocks.
enum class Substream : std::uint32_t { brownian = 0, poisson = 1 };

class NoiseStream {
 public:
  // delta: step size; lambda: jump intensity. Requires lambda*delta <= 10
  // (the inversion sampling regime).
  NoiseStream(std::uint64_t master_seed, std::uint64_t path_index, double delta,
              double lambda);

  // Uniform draw in the open interval (0, 1) for the given step/substream.
  double uniform(std::uint64_t step, Substream s) const;

  // Brownian increment over one step: N(0, delta).
  double brownian_increment(std::uint64_t step) const;

  // Poisson increment over one step: count with mean lambda*delta.
  long poisson_increment(std::uint64_t step) const;

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t path_index() const { return path_index_; }
  double delta() const { return delta_; }
  double lambda() const { return lambda_; }

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t path_index_ = 0;
  double delta_ = 0.0;
  double lambda_ = 0.0;
  double jump_mean_ = 0.0;
  double sqrt_delta_ = 0.0;
};

}  // namespace sddemc
