#include "fisher/rng.hpp"

#include <cmath>
#include <numbers>

namespace fisher {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t word) noexcept {
  return mix64(h ^ mix64(word + kGolden));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t coordinate,
                     StreamRole role) noexcept {
  std::uint64_t h = mix64(seed);
  h = absorb(h, iteration);
  h = absorb(h, coordinate);
  h = absorb(h, static_cast<std::uint64_t>(role));
  key_ = h;
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fisher
