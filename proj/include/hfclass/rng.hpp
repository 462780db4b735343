#pragma once

#include <cstdint>
#include <random>

#include "hfclass/common.hpp"

namespace hfc {

/// Derives an independent 64-bit seed for sub-stream `stream` of `seed`
/// (splitmix64 finalizer over the pair).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with distributions defined in terms of raw engine output,
/// so draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal deviate.
  double normal();

  /// Circularly symmetric complex Gaussian with unit mean power.
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hfc
