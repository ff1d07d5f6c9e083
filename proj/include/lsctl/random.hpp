#pragma once

#include <cstdint>
#include <random>

namespace lsctl {

/// Seeded 64-bit Mersenne twister with a platform-independent uniform draw.
///
/// Streams are split by (seed, index) so that record i of a run does not depend
/// on how many workers produced records 0..i-1.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6c73u};
    Rng r(0);
    r.engine_.seed(seq);
    return r;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lsctl
