#pragma once

#include <cstddef>
#include <cstdint>

#include "trafficbp/history.hpp"
#include "trafficbp/mrf.hpp"
#include "trafficbp/netgraph.hpp"

namespace trafficbp {

/// Synchronous logistic congestion-spread dynamics:
///   P(x_i(t+1) = 1) = logistic(alpha + beta x_i(t) + gamma f_i(t)),
/// f_i(t) being the fraction of i's neighbours congested at t. The chain
/// starts all-fluid and the first burn_in steps are discarded.
struct DynamicsParams {
  double alpha = -3.5;
  double beta = 3.0;
  double gamma = 4.0;
  std::size_t burn_in = 100;
};

struct ProbeParams {
  double coverage = 0.25;  // ρ, probability a (segment, layer) cell is observed
  double flip = 0.0;       // ε, probability an observed state is reported flipped
  std::uint64_t seed = 0;
};

double logistic(double z) noexcept;

/// Returns `steps` rows with columns in graph segment order. Draw for segment
/// i at chain step k (burn-in included) is CounterRng(seed, k).uniform(i).
HistoryMatrix simulate(const RoadGraph& graph, const DynamicsParams& params, std::size_t steps,
                       std::uint64_t seed);

/// Probe observations for rows [first_row, first_row + layers). Observation
/// variable ids are layer * cols + column, matching SpaceTimeIndex when the
/// history columns follow graph segment order. Missing truth cells are never
/// observed. Throws ParameterError when the window leaves the history.
ObservationSet sample_probes(const HistoryMatrix& history, const ProbeParams& probes,
                             std::size_t first_row, std::size_t layers);

}  // namespace trafficbp
