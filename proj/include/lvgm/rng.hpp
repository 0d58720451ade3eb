#pragma once

#include <cmath>
#include <cstdint>

#include "lvgm/errors.hpp"

namespace lvgm {

// Self-contained xoshiro256++ generator with splitmix64 seeding.
// Distribution code is written out here (instead of <random>) so that
// streams are bit-reproducible across standard library implementations,
// and substream() gives counter-based per-task streams whose output does
// not depend on how work is split over threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Independent stream derived from (seed, stream); used one per sample,
  /// per subsample, per trial so parallel order never matters.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64_mix(seed) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller (sine branch discarded, no cached state).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Poisson draw; inversion below mean 10, Hormann's PTRS above.
  double poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw SamplerError("poisson: invalid mean");
    if (mean == 0.0) return 0.0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      double k = -1.0;
      do {
        prod *= uniform();
        k += 1.0;
      } while (prod > limit);
      return k;
    }
    return poisson_ptrs(mean);
  }

  uint64_t integer_below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_[4];

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t splitmix64_mix(std::uint64_t x) { return splitmix64(x); }

  double poisson_ptrs(double mean) {
    // Transformed rejection with squeeze (Hormann 1993), exact for mean >= 10.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform_pos();
      const double us = 0.5 - std::fabs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return k;
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          k * loglam - mean - std::lgamma(k + 1.0)) {
        return k;
      }
    }
  }
};

}  // namespace lvgm
