#include "sddemc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace sddemc {

namespace {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

PhiloxCtr philox4x32_10(PhiloxCtr ctr, PhiloxKey key) {
  constexpr std::uint32_t kMult0 = 0xD2511F53u;
  constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0;; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo32(kMult0, ctr[0], hi0, lo0);
    mulhilo32(kMult1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    if (round == 9) {
      break;
    }
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// Rational approximations from Wichura's PPND16 routine; relative error below
// 1e-15 across (0, 1).
double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("inverse_normal_cdf: u must lie in (0, 1)");
  }
  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double numer =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double denom =
        ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
             3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
           5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
         4.2313330701600911252e+1) * r + 1.0;
    return numer / denom;
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double numer =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double denom =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
           6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
         2.05319162663775882187e+0) * r + 1.0;
    x = numer / denom;
  } else {
    r -= 5.0;
    const double numer =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double denom =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
         5.99832206555887937690e-1) * r + 1.0;
    x = numer / denom;
  }
  return q < 0.0 ? -x : x;
}

long poisson_inverse(double u, double mean) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("poisson_inverse: u must lie in (0, 1)");
  }
  if (!(mean >= 0.0 && mean <= 10.0)) {
    throw std::invalid_argument("poisson_inverse: mean must lie in [0, 10]");
  }
  double p = std::exp(-mean);
  double cdf = p;
  long k = 0;
  // For mean <= 10 the CDF passes 1 - 1e-15 long before k = 400; the cap only
  // guards against pathological rounding.
  while (u > cdf && k < 400) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t path_index,
                         double delta, double lambda)
    : master_seed_(master_seed),
      path_index_(path_index),
      delta_(delta),
      lambda_(lambda),
      jump_mean_(lambda * delta),
      sqrt_delta_(std::sqrt(delta)) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("NoiseStream: delta must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("NoiseStream: lambda must be nonnegative");
  }
  if (jump_mean_ > 10.0) {
    throw std::invalid_argument(
        "NoiseStream: lambda*delta must be <= 10 (Poisson inversion regime)");
  }
}

double NoiseStream::uniform(std::uint64_t step, Substream s) const {
  if (step > 0xFFFFFFFFull) {
    throw std::invalid_argument("NoiseStream: step index exceeds 2^32 - 1");
  }
  const PhiloxCtr ctr = {static_cast<std::uint32_t>(step),
                         static_cast<std::uint32_t>(path_index_),
                         static_cast<std::uint32_t>(path_index_ >> 32),
                         static_cast<std::uint32_t>(s)};
  const PhiloxKey key = {static_cast<std::uint32_t>(master_seed_),
                         static_cast<std::uint32_t>(master_seed_ >> 32)};
  const PhiloxCtr out = philox4x32_10(ctr, key);
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | static_cast<std::uint64_t>(out[1]);
  // 53 significant bits, shifted into the open interval (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::brownian_increment(std::uint64_t step) const {
  return inverse_normal_cdf(uniform(step, Substream::brownian)) * sqrt_delta_;
}

long NoiseStream::poisson_increment(std::uint64_t step) const {
  if (jump_mean_ == 0.0) {
    return 0;
  }
  return poisson_inverse(uniform(step, Substream::poisson), jump_mean_);
}

}  // namespace sddemc
