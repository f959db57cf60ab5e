#pragma once

#include <cstdint>

namespace homog {

/// Deterministic 64-bit mixing generator (splitmix64). The update is
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
///   z = (z ^ z>>27) * 0x94D049BB133111EB
///   return z ^ z>>31
/// and uniform doubles take the top 53 bits. The exact sequence is part of
/// the toolkit's reproducibility contract (see README), so this must not be
/// swapped for std::mt19937 or similar.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }
};

}  // namespace homog
