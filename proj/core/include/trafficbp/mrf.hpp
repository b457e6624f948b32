#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trafficbp/diagnostics.hpp"
#include "trafficbp/netgraph.hpp"

namespace trafficbp {

/// Binary traffic state. Files always use this 0/1 encoding.
enum class TrafficState : std::uint8_t { fluid = 0, congested = 1 };

/// Spin encoding s = 1 - 2x: fluid is spin up (+1), congested spin down (-1).
constexpr int spin(TrafficState state) noexcept {
  return 1 - 2 * static_cast<int>(state);
}
constexpr TrafficState state_from_spin(int s) noexcept {
  return s > 0 ? TrafficState::fluid : TrafficState::congested;
}
constexpr int to_int(TrafficState state) noexcept { return static_cast<int>(state); }

/// Distribution of one binary variable, indexed by x (0 = fluid).
using StateTable = std::array<double, 2>;
/// Joint distribution of two binary variables, indexed [x_i][x_j].
using JointTable = std::array<std::array<double, 2>, 2>;

inline JointTable transposed(const JointTable& t) noexcept {
  return {{{t[0][0], t[1][0]}, {t[0][1], t[1][1]}}};
}

struct Coupling {
  std::size_t i;
  std::size_t j;
  double J;

  bool operator==(const Coupling&) const = default;
};

/// Binary pairwise MRF over spins:
///   p(s) ∝ exp( Σ_edges J_ij s_i s_j + Σ_i h_i s_i ).
/// Edges have i < j. The number of variables is fields.size().
struct PairwiseModel {
  std::vector<Coupling> edges;
  std::vector<double> fields;

  std::size_t variable_count() const noexcept { return fields.size(); }
  bool operator==(const PairwiseModel&) const = default;
};

std::vector<std::size_t> degrees(const PairwiseModel& model);

/// Reports non-finite parameters, self edges, duplicate edges, edges with
/// i > j and out-of-range ids.
Diagnostics validate_model(const PairwiseModel& model);

/// E(s) = -Σ J_ij s_i s_j - Σ h_i s_i. Throws ParameterError if the
/// configuration length differs from the variable count.
double energy(const PairwiseModel& model, std::span<const int> spins);

/// Hard evidence, at most one state per variable.
class ObservationSet {
 public:
  ObservationSet() = default;

  /// Re-adding the same state is a no-op; a different state throws DataError.
  void add(std::size_t variable, TrafficState state);

  std::optional<TrafficState> find(std::size_t variable) const;
  bool contains(std::size_t variable) const { return entries_.contains(variable); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Entries ordered by variable id.
  const std::map<std::size_t, TrafficState>& entries() const noexcept { return entries_; }

  bool operator==(const ObservationSet&) const = default;

 private:
  std::map<std::size_t, TrafficState> entries_;
};

/// Result of clamping observed variables.
struct ConditionedModel {
  PairwiseModel reduced;
  /// Reduced id -> original id (ascending).
  std::vector<std::size_t> kept;
  /// Original id -> clamped state, empty for free variables.
  std::vector<std::optional<TrafficState>> clamped;
};

/// Exact conditioning by field folding: each observed variable i with spin
/// σ_i is removed and every neighbour j receives h_j += J_ij σ_i.
/// Throws ParameterError for out-of-range observations.
ConditionedModel condition(const PairwiseModel& model, const ObservationSet& observations);

/// Parameters of a time-invariant space-time model, aligned to a
/// SpaceTimeIndex: one coupling per adjacency pair, one temporal coupling per
/// segment and one field per space-time variable.
struct SpaceTimeModel {
  SpaceTimeIndex index;
  std::vector<double> spatial_coupling;
  std::vector<double> temporal_coupling;
  std::vector<double> field;
};

/// Replicates the pair and segment couplings across layers.
/// Throws ParameterError when a coupling or field is missing (size mismatch).
PairwiseModel assemble_model(const SpaceTimeIndex& index,
                             std::span<const double> spatial_coupling,
                             std::span<const double> temporal_coupling,
                             std::span<const double> field);

PairwiseModel assemble_model(const SpaceTimeModel& model);

}  // namespace trafficbp
