#include "trafficbp/rng.hpp"

namespace trafficbp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return splitmix64(seed ^ splitmix64(salt + kGolden));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(derive_seed(seed, stream)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return splitmix64(key_ + splitmix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(std::uint64_t counter, double lo, double hi) const noexcept {
  return lo + (hi - lo) * uniform(counter);
}

std::uint64_t CounterRng::below(std::uint64_t counter, std::uint64_t bound) const noexcept {
  // Reject the top partial bucket so every residue is equally likely; retries
  // for the same counter come from a derived sub-stream.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = bits(counter);
  if (x >= limit) {
    const CounterRng retry(key_, counter);
    std::uint64_t attempt = 0;
    do {
      x = retry.bits(attempt++);
    } while (x >= limit);
  }
  return x % bound;
}

}  // namespace trafficbp
