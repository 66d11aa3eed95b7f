#include "rliot/rng.hpp"

#include <limits>
#include <stdexcept>

namespace rliot {

namespace {

// Unbiased draw in [0, span] by rejection.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t span) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (span == kMax) return engine();
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = kMax - (kMax % range);
  std::uint64_t x = engine();
  while (x >= limit) x = engine();
  return x % range;
}

}  // namespace

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + bounded(engine_, span));
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("index: n must be positive");
  return static_cast<std::size_t>(bounded(engine_, n - 1));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace rliot
