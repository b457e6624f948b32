#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trafficbp/history.hpp"
#include "trafficbp/mrf.hpp"
#include "trafficbp/netgraph.hpp"

namespace trafficbp {

inline constexpr double kDefaultPseudocount = 1.0;

struct SingletonMoment {
  StateTable table;  // P(x = 0), P(x = 1)
  double count;      // observations behind the table, before smoothing
};

/// Joint over (x_a, x_b). For temporal classes a == b and the table is over
/// (x at t, x at t + 1).
struct PairMoment {
  std::size_t a;
  std::size_t b;
  EdgeKind kind;
  JointTable table;
  double count;
};

/// Empirical marginals per variable class and per edge class.
///
/// From history: singletons are per segment (shared by every layer of that
/// segment, boundary or interior), pairs are the adjacency pairs followed by
/// one temporal class per segment. From the exact oracle: singletons are
/// model variables and pairs are model edges, in model order.
struct MomentSet {
  std::vector<SingletonMoment> singletons;
  std::vector<PairMoment> pairs;
  double pseudocount = 0.0;

  std::span<const PairMoment> spatial() const noexcept;
  std::span<const PairMoment> temporal() const noexcept;
};

/// Pools same-row spatial pairs over all rows, lag-1 temporal pairs over all
/// consecutive rows, and singleton cells over all rows; a pair sample counts
/// only when both cells are present. `pseudocount` is added to every cell of
/// every count table. History columns may be in any order but must be exactly
/// the graph's segments (DataError otherwise); pseudocount must be > 0.
MomentSet estimate_moments(const HistoryMatrix& history, const SpaceTimeIndex& index,
                           double pseudocount = kDefaultPseudocount);

/// J = ¼ ln[ b(++) b(--) / (b(+-) b(-+)) ].
/// Throws NumericDomainError on a non-positive cell.
double bethe_coupling(const JointTable& pair);

/// h = (1 - d) ½ ln[ b(+)/b(-) ] + Σ_j ¼ ln[ b(++) b(+-) / (b(-+) b(--)) ],
/// with d = incident.size() and each incident table oriented with this
/// variable first. Throws NumericDomainError on a non-positive cell.
double bethe_field(const StateTable& single, std::span<const JointTable> incident);

/// Inverts a MomentSet whose singletons are model variables and whose pairs
/// are model edges (as produced by exact_moments).
PairwiseModel bethe_inverse(const MomentSet& moments);

/// estimate_moments followed by per-class Bethe inversion. Each space-time
/// variable's field uses its own space-time degree.
SpaceTimeModel calibrate(const HistoryMatrix& history, const SpaceTimeIndex& index,
                         double pseudocount = kDefaultPseudocount);

/// Inversion step of calibrate() on precomputed moments.
SpaceTimeModel calibrate_from_moments(const MomentSet& moments, const SpaceTimeIndex& index);

}  // namespace trafficbp
