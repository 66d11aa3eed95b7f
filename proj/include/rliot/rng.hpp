#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace rliot {

/// Seeded random source with platform-independent draws.
///
/// The standard distributions are implementation-defined, so every draw the
/// learner makes goes through the helpers below. Two Rng instances built
/// from the same seed yield the same stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 mixing of a base seed with a stream number; used to give every
/// run (and every evaluation pass) its own independent stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace rliot
