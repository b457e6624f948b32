#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trafficbp/calibrate.hpp"
#include "trafficbp/history.hpp"
#include "trafficbp/mrf.hpp"

namespace trafficbp {

/// Enumeration is limited to 2^22 configurations.
inline constexpr std::size_t kMaxEnumerationVariables = 22;

struct ExactResult {
  double log_partition = 0.0;
  std::vector<double> p_congested;
  /// One table per model edge, indexed [x_i][x_j].
  std::vector<JointTable> pairs;
};

/// Probability of every configuration. Configuration c has x_k = bit k of c.
/// Throws CapacityError above kMaxEnumerationVariables.
std::vector<double> state_probabilities(const PairwiseModel& model);

double log_partition(const PairwiseModel& model);

/// Exact ln Z and marginals by summation over all 2^V configurations in
/// ascending configuration order.
ExactResult enumerate(const PairwiseModel& model);

/// Exact singleton and edge marginals packaged as a MomentSet (zero
/// pseudocount, counts reported as 0).
MomentSet exact_moments(const PairwiseModel& model);

/// Inverse-CDF sampling from the enumerated distribution. Column k is named
/// columns[k] (default "v<k>"), cells use the 0/1 state encoding.
HistoryMatrix sample_exact(const PairwiseModel& model, std::size_t samples, std::uint64_t seed,
                           std::vector<std::string> columns = {});

}  // namespace trafficbp
