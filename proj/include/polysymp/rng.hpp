#pragma once

// Deterministic 64-bit generator (splitmix64) used for all random data.
// Seeded experiments must be byte-reproducible across platforms, so no
// implementation-defined std::random distributions are used anywhere.

#include <cstdint>

namespace polysymp {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double symmetric() { return 2.0 * uniform01() - 1.0; }
};

}  // namespace polysymp
