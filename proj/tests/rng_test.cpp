#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "trafficbp/rng.hpp"

namespace trafficbp {
namespace {

TEST(CounterRng, DrawIsPureFunctionOfCounter) {
  const CounterRng a(7, 3);
  const CounterRng b(7, 3);
  for (std::uint64_t k = 0; k < 100; ++k) EXPECT_EQ(a.bits(k), b.bits(k));
  EXPECT_NE(a.bits(0), CounterRng(7, 4).bits(0));
  EXPECT_NE(a.bits(0), CounterRng(8, 3).bits(0));
}

TEST(CounterRng, UniformMeanAndRange) {
  const CounterRng rng(1, 0);
  constexpr std::size_t kN = 200000;
  double sum = 0.0;
  for (std::size_t k = 0; k < kN; ++k) {
    const double u = rng.uniform(k);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // 5 sigma of the mean of U[0,1): sqrt(1/12 / n)
  EXPECT_NEAR(sum / kN, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / kN));
}

TEST(CounterRng, BelowIsRoughlyUniform) {
  const CounterRng rng(99, 1);
  std::vector<int> counts(6, 0);
  constexpr int kN = 60000;
  for (int k = 0; k < kN; ++k) ++counts[rng.below(k, 6)];
  for (const int c : counts) EXPECT_NEAR(c, kN / 6.0, 5.0 * std::sqrt(kN * (1.0 / 6) * (5.0 / 6)));
}

}  // namespace
}  // namespace trafficbp
