#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace paretoscope {

/// Seeded pseudo-random stream (xoshiro256** seeded through SplitMix64).
///
/// Every stochastic operation in the library takes one of these explicitly.
/// Streams are single-owner. Child streams are derived deterministically from
/// the parent's seed, never from its current state, so `derive("forest")`
/// yields the same stream no matter how many numbers the parent produced.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Child stream keyed by an integer (e.g. tree index).
  RandomStream split(std::uint64_t key) const;

  /// Child stream keyed by a label (e.g. "phase1").
  RandomStream derive(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace paretoscope
