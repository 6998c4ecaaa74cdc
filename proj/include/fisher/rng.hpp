#pragma once

#include <cstdint>

namespace fisher {

/// Distinguishes the independent streams that share a master seed.
enum class StreamRole : std::uint64_t {
  Price = 1,
  Utility = 2,
  MarketValues = 3,
  MarketBudgets = 4,
  Auxiliary = 5,
};

/// Counter-based generator: draw k of a stream is a pure function of
/// (key, k), and the key is a hash of (seed, iteration, coordinate, role).
/// Two streams built from the same tuple yield the same sequence no matter
/// when or on which thread they are consumed.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t coordinate,
            StreamRole role) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace fisher
