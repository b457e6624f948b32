#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/test_models.hpp"
#include "trafficbp/calibrate.hpp"
#include "trafficbp/errors.hpp"
#include "trafficbp/oracle.hpp"
#include "trafficbp/simulate.hpp"

namespace trafficbp {
namespace {

RoadGraph pair_graph() { return RoadGraph{{"a", "b"}, {{"a", "b"}}}; }

HistoryMatrix history_from(const std::vector<std::string>& columns,
                           const std::vector<std::vector<int>>& rows) {
  HistoryMatrix h(columns, rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (rows[r][c] >= 0) h.set(r, c, static_cast<TrafficState>(rows[r][c]));
    }
  }
  return h;
}

TEST(EstimateMoments, HandCountedPairWithPseudocount) {
  const auto index = build_space_time(pair_graph(), 1);
  const auto h = history_from({"a", "b"}, {{0, 0}, {0, 1}, {1, 1}});
  const auto m = estimate_moments(h, index, 1.0);
  const auto& t = m.spatial()[0].table;
  EXPECT_NEAR(t[0][0], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(t[0][1], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(t[1][0], 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(t[1][1], 2.0 / 7.0, 1e-15);
  EXPECT_EQ(m.spatial()[0].count, 3.0);
  // a: two zeros, one one -> (3/5, 2/5)
  EXPECT_NEAR(m.singletons[0].table[0], 3.0 / 5.0, 1e-15);
  // temporal class of a: pairs (0,0), (0,1) -> counts 1,1,0,0 -> (2,2,1,1)/6
  const auto& ta = m.temporal()[0].table;
  EXPECT_NEAR(ta[0][0], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(ta[0][1], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(ta[1][0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(ta[1][1], 1.0 / 6.0, 1e-15);
}

TEST(EstimateMoments, PairwiseCompleteMissingRule) {
  const auto index = build_space_time(pair_graph(), 2);
  const auto h = history_from({"a", "b"}, {{-1, 1}, {0, -1}, {-1, -1}});
  const auto m = estimate_moments(h, index, 1.0);
  for (const auto& row : m.spatial()[0].table) {
    for (const double p : row) EXPECT_DOUBLE_EQ(p, 0.25);
  }
  EXPECT_EQ(m.spatial()[0].count, 0.0);
  EXPECT_EQ(m.singletons[0].count, 1.0);
  for (const auto& pm : m.pairs) {
    double sum = 0.0;
    for (const auto& row : pm.table) {
      for (const double p : row) {
        EXPECT_GT(p, 0.0);
        sum += p;
      }
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(EstimateMoments, IndependentHistoryFactorizes) {
  const RoadGraph g{{"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}};
  const PairwiseModel indep{{}, {0.4, -0.3, 0.0}};
  constexpr std::size_t kN = 100000;
  const auto h = sample_exact(indep, kN, 3, {"a", "b", "c"});
  const auto m = estimate_moments(h, build_space_time(g, 1), 1.0);
  for (const auto& pm : m.spatial()) {
    const auto& a = m.singletons[pm.a].table;
    const auto& b = m.singletons[pm.b].table;
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const double p = a[x] * b[y];
        EXPECT_NEAR(pm.table[x][y], p, 5.0 * std::sqrt(p * (1 - p) / kN));
      }
    }
  }
}

TEST(EstimateMoments, ColumnOrderIsIrrelevant) {
  const auto index = build_space_time(pair_graph(), 2);
  const auto h1 = history_from({"a", "b"}, {{0, 1}, {1, 1}, {0, 0}});
  const auto h2 = history_from({"b", "a"}, {{1, 0}, {1, 1}, {0, 0}});
  const auto m1 = estimate_moments(h1, index);
  const auto m2 = estimate_moments(h2, index);
  for (std::size_t k = 0; k < m1.pairs.size(); ++k) EXPECT_EQ(m1.pairs[k].table, m2.pairs[k].table);
}

TEST(EstimateMoments, Errors) {
  const auto index = build_space_time(pair_graph(), 1);
  EXPECT_THROW(estimate_moments(HistoryMatrix({"a", "b"}, 0), index), DataError);
  EXPECT_THROW(estimate_moments(history_from({"a", "x"}, {{0, 0}}), index), DataError);
  EXPECT_THROW(estimate_moments(history_from({"a"}, {{0}}), index), DataError);
  EXPECT_THROW(estimate_moments(history_from({"a", "b"}, {{0, 0}}), index, 0.0), ParameterError);
}

TEST(BetheInverse, IndependentPair) {
  const StateTable a{0.7, 0.3};
  const StateTable b{0.4, 0.6};
  JointTable t{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) t[x][y] = a[x] * b[y];
  }
  EXPECT_NEAR(bethe_coupling(t), 0.0, 1e-15);
  const std::vector<JointTable> incident{t};
  EXPECT_NEAR(bethe_field(a, incident), 0.5 * std::log(a[0] / a[1]), 1e-15);
  const std::vector<JointTable> incident_b{transposed(t)};
  EXPECT_NEAR(bethe_field(b, incident_b), 0.5 * std::log(b[0] / b[1]), 1e-15);
}

TEST(BetheInverse, SymmetricPairGivesAtanh) {
  for (const double c : {-0.6, 0.1, 0.8}) {
    const JointTable t{{{(1 + c) / 4, (1 - c) / 4}, {(1 - c) / 4, (1 + c) / 4}}};
    EXPECT_NEAR(bethe_coupling(t), std::atanh(c), 1e-14);
    // Cross-check against a 4-state enumeration of the h = 0 two-variable model.
    const PairwiseModel m{{{0, 1, std::atanh(c)}}, {0.0, 0.0}};
    const auto exact = enumerate(m).pairs[0];
    EXPECT_NEAR(exact[0][0] + exact[1][1] - exact[0][1] - exact[1][0], c, 1e-14);
  }
}

TEST(BetheInverse, ZeroCellIsDomainError) {
  const JointTable t{{{0.5, 0.0}, {0.25, 0.25}}};
  EXPECT_THROW(bethe_coupling(t), NumericDomainError);
  const std::vector<JointTable> incident{t};
  EXPECT_THROW(bethe_field({0.5, 0.5}, incident), NumericDomainError);
  EXPECT_THROW(bethe_field({1.0, 0.0}, {}), NumericDomainError);
}

TEST(BetheInverse, RoundTripOnTreesProperty) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing::random_tree(rng, 1 + rng() % 15);
    const auto back = bethe_inverse(exact_moments(m));
    ASSERT_EQ(back.edges.size(), m.edges.size());
    for (std::size_t e = 0; e < m.edges.size(); ++e) EXPECT_NEAR(back.edges[e].J, m.edges[e].J, 1e-8);
    for (std::size_t i = 0; i < m.variable_count(); ++i) EXPECT_NEAR(back.fields[i], m.fields[i], 1e-8);
  }
}

TEST(Calibrate, FairCoinsGiveNearZeroParameters) {
  const auto g = gen_graph({.kind = GraphKind::ring, .n = 5});
  const auto index = build_space_time(g, 3);
  constexpr std::size_t kN = 40000;
  DynamicsParams coins{0.0, 0.0, 0.0, 0};
  const auto h = simulate(g, coins, kN, 8);
  const auto model = calibrate(h, index, 1.0);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(kN));
  for (const double j : model.spatial_coupling) EXPECT_LE(std::abs(j), 5.0 * sigma);
  for (const double j : model.temporal_coupling) EXPECT_LE(std::abs(j), 5.0 * sigma);
  for (std::size_t v = 0; v < index.variable_count(); ++v) {
    const double d = static_cast<double>(index.degree(v));
    EXPECT_LE(std::abs(model.field[v]), 5.0 * (std::abs(1.0 - d) + d) * sigma);
  }
}

TEST(Calibrate, RecoversTreeCouplingsFromSamples) {
  std::mt19937_64 rng(41);
  const auto truth = testing::random_tree(rng, 8);
  RoadGraph g;
  for (std::size_t k = 0; k < 8; ++k) g.segments.push_back("v" + std::to_string(k));
  for (const auto& e : truth.edges) g.adjacency.emplace_back(g.segments[e.i], g.segments[e.j]);
  const auto index = build_space_time(g, 1);
  const auto h = sample_exact(truth, 100000, 42, g.segments);
  const auto model = calibrate(h, index, 1.0);
  for (std::size_t e = 0; e < truth.edges.size(); ++e) {
    EXPECT_NEAR(model.spatial_coupling[e], truth.edges[e].J, 0.05);
  }
}

TEST(Calibrate, HugePseudocountShrinksToZero) {
  const auto g = gen_graph({.kind = GraphKind::ring, .n = 4});
  const auto h = simulate(g, {}, 50, 1);
  const auto model = calibrate(h, build_space_time(g, 2), 1e6);
  for (const double j : model.spatial_coupling) EXPECT_LT(std::abs(j), 1e-4);
  for (const double j : model.temporal_coupling) EXPECT_LT(std::abs(j), 1e-4);
  for (const double x : model.field) EXPECT_LT(std::abs(x), 1e-3);
}

TEST(Calibrate, AlwaysFiniteProperty) {
  std::mt19937_64 rng(43);
  const auto g = gen_graph({.kind = GraphKind::grid, .rows = 2, .cols = 3});
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t rows = 1 + rng() % 30;
    HistoryMatrix h(g.segments, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < h.cols(); ++c) {
        const auto roll = rng() % 4;
        if (roll == 0) continue;  // missing
        h.set(r, c, roll == 1 ? TrafficState::congested : TrafficState::fluid);
      }
    }
    const double lambda = std::pow(10.0, -6.0 + static_cast<double>(rng() % 10));
    const auto model = calibrate(h, build_space_time(g, 1 + rng() % 4), lambda);
    for (const double j : model.spatial_coupling) EXPECT_TRUE(std::isfinite(j));
    for (const double j : model.temporal_coupling) EXPECT_TRUE(std::isfinite(j));
    for (const double x : model.field) EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(Calibrate, RelabelingPermutesTheModel) {
  const auto g = gen_graph({.kind = GraphKind::random_regular, .n = 8, .degree = 3, .seed = 2});
  const auto h = simulate(g, {-1.0, 1.0, 1.5, 20}, 3000, 5);
  const auto base = calibrate(h, build_space_time(g, 3));

  // Reverse the segment order in both graph and history; reverse each pair.
  std::vector<std::size_t> perm(g.segments.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = perm.size() - 1 - k;
  RoadGraph g2;
  for (const std::size_t k : perm) g2.segments.push_back(g.segments[k]);
  for (const auto& [a, b] : g.adjacency) g2.adjacency.emplace_back(b, a);
  HistoryMatrix h2(g2.segments, h.rows());
  for (std::size_t r = 0; r < h.rows(); ++r) {
    for (std::size_t c = 0; c < perm.size(); ++c) h2.set(r, c, *h.state(r, perm[c]));
  }
  const auto index2 = build_space_time(g2, 3);
  const auto relabeled = calibrate(h2, index2);

  const auto& index = base.index;
  for (std::size_t k = 0; k < base.spatial_coupling.size(); ++k) {
    EXPECT_NEAR(base.spatial_coupling[k], relabeled.spatial_coupling[k], 1e-12);
  }
  for (std::size_t s = 0; s < index.segment_count(); ++s) {
    const std::size_t s2 = *index2.segment_index(g.segments[s]);
    EXPECT_NEAR(base.temporal_coupling[s], relabeled.temporal_coupling[s2], 1e-12);
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_NEAR(base.field[index.variable(s, t)], relabeled.field[index2.variable(s2, t)], 1e-12);
    }
  }
}

}  // namespace
}  // namespace trafficbp
