#pragma once

#include <cstdint>

namespace trafficbp {

/// SplitMix64 output function (Steele, Lea & Flood). Bijective 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit key from a parent seed and a salt.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Counter-addressable random stream.
///
/// Every draw is a pure function of (seed, stream, counter):
///   key   = splitmix64(seed ^ splitmix64(stream + golden))
///   value = splitmix64(key + splitmix64(counter))
/// so a cell's draw does not depend on the order in which cells are visited
/// or on how work is split across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;

  /// Uniform double in [lo, hi).
  double uniform(std::uint64_t counter, double lo, double hi) const noexcept;

  /// Unbiased integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace trafficbp
