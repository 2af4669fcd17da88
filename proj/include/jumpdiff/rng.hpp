#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace jumpdiff {

//! Deterministic random stream.
//!
//! Wraps std::mt19937_64 but implements every distribution in-house, so a
//! given seed reproduces the identical draw sequence on any platform and any
//! standard library. All samplers in this project take an explicit Rng&;
//! nothing reads hidden global state.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(scramble(seed)) {}

  //! Stream for replication i of a batch: seed_i = base_seed + i.
  static Rng for_replication(std::uint64_t base_seed, std::uint64_t i) {
    return Rng(base_seed + i);
  }

  //! Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  //! Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  //! Standard normal (Box-Muller, second draw cached).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  //! Exponential with the given rate.
  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  //! Poisson count with arbitrary mean. Product-of-uniforms below the
  //! cutover, Hormann's PTRS transformed rejection above it.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0))
      throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

private:
  static std::uint64_t scramble(std::uint64_t x) {
    // splitmix64 finalizer; spreads consecutive seeds across the state space
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t poisson_ptrs(double lam) {
    const double slam = std::sqrt(lam);
    const double loglam = std::log(lam);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kr = std::floor((2.0 * a / us + b) * u + lam + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kr);
      if (kr < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          kr * loglam - lam - std::lgamma(kr + 1.0))
        return static_cast<std::uint64_t>(kr);
    }
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace jumpdiff
