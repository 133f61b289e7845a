#include "sddemc/path.hpp"

#include <cmath>
#include <sstream>

#include "sddemc/errors.hpp"

namespace sddemc {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::TEM:
      return "TEM";
    case Scheme::BEM:
      return "BEM";
    case Scheme::EM:
      return "EM";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "TEM") {
    return Scheme::TEM;
  }
  if (name == "BEM") {
    return Scheme::BEM;
  }
  if (name == "EM") {
    return Scheme::EM;
  }
  throw config_error("unknown scheme '" + name + "' (expected TEM, BEM or EM)");
}

double tem_step(const ModelParams& p, const ClampBounds& b, double delta,
                double x_now, double x_delayed, const VolatilityFunction& phi,
                double dB, std::int64_t dN) {
  const double drift = truncated_drift(p, b, x_now);
  const double diffusion = truncated_diffusion(p, b, x_now);
  const double next = x_now + drift * delta + phi(x_delayed) * diffusion * dB +
                      eval_jump(p, x_now) * static_cast<double>(dN);
  if (!std::isfinite(next)) {
    throw numerical_error("tem_step: non-finite state (the truncated coefficients "
                          "are bounded; check the volatility multiplier)");
  }
  return next;
}

double tem_step(const ModelParams& p, const TruncationRule& rule, double delta,
                double x_now, double x_delayed, const VolatilityFunction& phi,
                double dB, std::int64_t dN) {
  return tem_step(p, clamp_bounds(rule, delta), delta, x_now, x_delayed, phi, dB, dN);
}

namespace {

void check_bem_preconditions(const ModelParams& p, double delta) {
  if (p.alpha_m1 != 0.0) {
    throw config_error("BEM requires alpha_m1 = 0 (no 1/x drift term)");
  }
  if (p.rho != 2.0) {
    throw config_error("BEM requires rho = 2 (quadratic drift pullback)");
  }
  if (!(p.alpha1 * delta < 1.0)) {
    throw config_error("BEM requires alpha1*delta < 1");
  }
}

}  // namespace

double bem_step(const ModelParams& p, double delta, double x_now,
                double x_delayed, const VolatilityFunction& phi, double dB,
                std::int64_t dN) {
  check_bem_preconditions(p, delta);
  const double a = p.alpha2 * delta;
  const double b = 1.0 - p.alpha1 * delta;  // > 0 by precondition
  const double diffusion = eval_diffusion(p, std::max(x_now, 0.0));
  const double c = x_now - p.alpha0 * delta + phi(x_delayed) * diffusion * dB +
                   eval_jump(p, x_now) * static_cast<double>(dN);
  double next;
  if (a == 0.0) {
    next = c / b;
  } else {
    const double disc = b * b + 4.0 * a * c;
    if (disc < 0.0) {
      throw numerical_error("bem_step: implicit update has no real root");
    }
    // Larger root of a*X^2 + b*X - c = 0 in the cancellation-free form.
    next = 2.0 * c / (b + std::sqrt(disc));
  }
  if (!std::isfinite(next)) {
    throw numerical_error("bem_step: non-finite state");
  }
  return next;
}

double em_step(const ModelParams& p, double delta, double x_now,
               double x_delayed, const VolatilityFunction& phi, double dB,
               std::int64_t dN) {
  if (!(x_now > 0.0)) {
    throw numerical_error("em_step: state left the positive domain where the "
                          "raw coefficients are defined");
  }
  const double next = x_now + eval_drift(p, x_now) * delta +
                      phi(x_delayed) * eval_diffusion(p, x_now) * dB +
                      eval_jump(p, x_now) * static_cast<double>(dN);
  if (!std::isfinite(next)) {
    throw numerical_error("em_step: non-finite state");
  }
  return next;
}

SimPath simulate_path_with_increments(const ModelParams& p,
                                      const TruncationRule& rule,
                                      const GridSpec& grid,
                                      const InitialSegment& xi,
                                      const VolatilityFunction& phi,
                                      Scheme scheme, std::span<const double> dB,
                                      std::span<const std::int64_t> dN,
                                      std::uint64_t path_index,
                                      bool record_increments) {
  if (grid.tau != p.tau) {
    throw config_error("grid.tau must equal the model delay tau");
  }
  const auto n = static_cast<std::size_t>(grid.n_steps);
  const auto m = static_cast<std::size_t>(grid.steps_per_delay);
  if (dB.size() != n || dN.size() != n) {
    throw std::invalid_argument("simulate_path_with_increments: increment arrays "
                                "must have one entry per step");
  }
  const double delta = grid.delta();

  SimPath path;
  path.grid = grid;
  path.scheme = scheme;
  path.path_index = path_index;
  path.states.resize(m + n + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = grid.time_at(static_cast<std::int64_t>(i) - grid.steps_per_delay);
    const double v = xi(t);
    if (!(std::isfinite(v) && v > 0.0)) {
      throw config_error("initial segment must be positive on [-tau, 0]");
    }
    path.states[i] = v;
  }

  ClampBounds bounds{};
  if (scheme == Scheme::TEM) {
    bounds = clamp_bounds(rule, delta);
  } else if (scheme == Scheme::BEM) {
    check_bem_preconditions(p, delta);
  }

  std::size_t k = 0;
  try {
    for (; k < n; ++k) {
      const double x_now = path.states[k + m];
      // One delay back on the same grid: X(t_{k-M}) sits at buffer slot k.
      const double x_delayed = path.states[k];
      double next;
      switch (scheme) {
        case Scheme::TEM:
          next = tem_step(p, bounds, delta, x_now, x_delayed, phi, dB[k], dN[k]);
          break;
        case Scheme::BEM:
          next = bem_step(p, delta, x_now, x_delayed, phi, dB[k], dN[k]);
          break;
        case Scheme::EM:
          next = em_step(p, delta, x_now, x_delayed, phi, dB[k], dN[k]);
          break;
        default:
          throw std::invalid_argument("simulate_path_with_increments: unknown scheme");
      }
      path.states[k + m + 1] = next;
      if (next < 0.0) {
        ++path.negativity_count;
      }
    }
  } catch (const numerical_error& e) {
    std::ostringstream os;
    os << "path " << path_index << " step " << k << ": " << e.what();
    throw numerical_error(os.str());
  }

  if (record_increments) {
    path.brownian.assign(dB.begin(), dB.end());
    path.poisson.assign(dN.begin(), dN.end());
  }
  return path;
}

SimPath simulate_path(const ModelParams& p, const TruncationRule& rule,
                      const GridSpec& grid, const InitialSegment& xi,
                      const VolatilityFunction& phi, const NoiseStream& noise,
                      Scheme scheme, bool record_increments) {
  if (noise.delta() != grid.delta()) {
    throw std::invalid_argument("simulate_path: noise stream step size does not "
                                "match the grid");
  }
  const auto n = static_cast<std::size_t>(grid.n_steps);
  std::vector<double> dB(n);
  std::vector<std::int64_t> dN(n);
  for (std::size_t k = 0; k < n; ++k) {
    dB[k] = noise.brownian_increment(k);
    dN[k] = noise.poisson_increment(k);
  }
  return simulate_path_with_increments(p, rule, grid, xi, phi, scheme, dB, dN,
                                       noise.path_index(), record_increments);
}

void aggregate_increments(std::span<const double> fine_dB,
                          std::span<const std::int64_t> fine_dN, int refine_log2,
                          std::vector<double>& coarse_dB,
                          std::vector<std::int64_t>& coarse_dN) {
  if (refine_log2 < 0 || refine_log2 > 62) {
    throw std::invalid_argument("aggregate_increments: refine_log2 out of range");
  }
  if (fine_dB.size() != fine_dN.size()) {
    throw std::invalid_argument("aggregate_increments: increment arrays differ in size");
  }
  const std::size_t r = std::size_t{1} << refine_log2;
  if (fine_dB.size() % r != 0) {
    throw config_error("aggregate_increments: step count must be divisible by "
                       "the refinement ratio");
  }
  const std::size_t n_coarse = fine_dB.size() / r;
  coarse_dB.assign(n_coarse, 0.0);
  coarse_dN.assign(n_coarse, 0);
  for (std::size_t j = 0; j < n_coarse; ++j) {
    double sum_b = 0.0;
    std::int64_t sum_n = 0;
    for (std::size_t i = j * r; i < (j + 1) * r; ++i) {
      sum_b += fine_dB[i];
      sum_n += fine_dN[i];
    }
    coarse_dB[j] = sum_b;
    coarse_dN[j] = sum_n;
  }
}

GridSpec coarsen_grid(const GridSpec& fine_grid, int refine_log2) {
  if (refine_log2 < 0 || refine_log2 > 62) {
    throw config_error("coarsen_grid: refinement exponent out of range");
  }
  const std::int64_t r = std::int64_t{1} << refine_log2;
  if (fine_grid.steps_per_delay % r != 0 || fine_grid.n_steps % r != 0) {
    throw config_error("coarsen_grid: coarse step must merge a power-of-two "
                       "number of fine steps that divides both the delay and "
                       "the horizon");
  }
  GridSpec coarse = fine_grid;
  coarse.steps_per_delay = fine_grid.steps_per_delay / r;
  coarse.n_steps = fine_grid.n_steps / r;
  return coarse;
}

CoupledPair simulate_coupled_pair(const ModelParams& p, const TruncationRule& rule,
                                  const GridSpec& fine_grid, int refine_log2,
                                  const InitialSegment& xi,
                                  const VolatilityFunction& phi,
                                  const NoiseStream& noise, Scheme scheme,
                                  bool record_increments) {
  const GridSpec coarse_grid = coarsen_grid(fine_grid, refine_log2);
  CoupledPair pair;
  pair.refine_log2 = refine_log2;
  pair.fine = simulate_path(p, rule, fine_grid, xi, phi, noise, scheme, true);
  std::vector<double> coarse_dB;
  std::vector<std::int64_t> coarse_dN;
  aggregate_increments(pair.fine.brownian, pair.fine.poisson, refine_log2,
                       coarse_dB, coarse_dN);
  pair.coarse = simulate_path_with_increments(p, rule, coarse_grid, xi, phi, scheme,
                                              coarse_dB, coarse_dN,
                                              noise.path_index(), record_increments);
  if (!record_increments) {
    pair.fine.brownian.clear();
    pair.fine.brownian.shrink_to_fit();
    pair.fine.poisson.clear();
    pair.fine.poisson.shrink_to_fit();
  }
  return pair;
}

}  // namespace sddemc
