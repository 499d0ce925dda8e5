#pragma once

#include <cmath>
#include <cstdint>

namespace hierfed {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> engines/distributions, whose output is implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller, cosine branch only. Consumes exactly two draws.
  double normal(double mean, double stddev) {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();  // log(0) guard
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * r * std::cos(two_pi * u2);
  }

  // Unbiased integer in [0, n) via rejection from the top of the range.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// Stream labels for derive_seed so independent draws never share a stream.
enum class SeedTag : std::uint64_t {
  CropProfiles = 1,
  Subscription = 2,
  FarmOffset = 3,
  TrainFeatures = 4,
  TrainNoise = 5,
  TestFeatures = 6,
  TestNoise = 7,
  ModelInit = 8,
};

// Fixed mixing of (seed, a, b) into a sub-seed. Keyed, not stream-based:
// adding farms or tags never perturbs the draws of existing ones.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
  SplitMix64 g(seed);
  SplitMix64 h(g.next() ^ (a * 0xD1B54A32D192ED03ull));
  SplitMix64 k(h.next() ^ (b * 0x9E3779B97F4A7C15ull));
  return k.next();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, SeedTag tag) {
  return derive_seed(seed, a, static_cast<std::uint64_t>(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, SeedTag tag) {
  return derive_seed(seed, static_cast<std::uint64_t>(tag), 0);
}

}  // namespace hierfed
