#pragma once

// Small deterministic generator (splitmix64) for reproducible sampling.
// Streams are derived from (seed, stream) pairs so fixed work units get the
// same draws no matter how they are scheduled across threads.

#include <cstdint>

namespace vinsys {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  SplitMix64(std::uint64_t seed, std::uint64_t stream)
      : state(seed ^ (stream * 0x9e3779b97f4a7c15ULL)) {
    next();  // decorrelate nearby streams
  }

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform double in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace vinsys
