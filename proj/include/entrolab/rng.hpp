#pragma once

#include <cstdint>

namespace entrolab {

/// SplitMix64 generator. Sampling campaigns seed it explicitly so that reports
/// are reproducible byte for byte.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 42) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace entrolab
