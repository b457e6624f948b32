#include "trafficbp/simulate.hpp"

#include <cmath>
#include <string>

#include "trafficbp/errors.hpp"
#include "trafficbp/rng.hpp"

namespace trafficbp {

namespace {
constexpr std::uint64_t kCoverageStream = 0xC0FE;
constexpr std::uint64_t kFlipStream = 0xF11B;

void check_probability(std::string_view name, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}
}  // namespace

double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

HistoryMatrix simulate(const RoadGraph& graph, const DynamicsParams& params, std::size_t steps,
                       std::uint64_t seed) {
  if (!std::isfinite(params.alpha) || !std::isfinite(params.beta) || !std::isfinite(params.gamma)) {
    throw ParameterError("dynamics parameters must be finite");
  }
  if (steps < 1) throw ParameterError("simulate needs steps >= 1");
  const SpaceTimeIndex index(graph, 1);
  const std::size_t n = index.segment_count();
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (const auto& [a, b] : index.pairs()) {
    neighbours[a].push_back(b);
    neighbours[b].push_back(a);
  }

  HistoryMatrix out(graph.segments, steps);
  std::vector<std::uint8_t> current(n, 0);
  std::vector<std::uint8_t> next(n, 0);
  const std::size_t total = params.burn_in + steps;
  for (std::size_t k = 0; k < total; ++k) {
    const CounterRng rng(seed, k);
    for (std::size_t i = 0; i < n; ++i) {
      double pressure = 0.0;
      if (!neighbours[i].empty()) {
        std::size_t congested = 0;
        for (const std::size_t j : neighbours[i]) congested += current[j];
        pressure = static_cast<double>(congested) / static_cast<double>(neighbours[i].size());
      }
      const double p = logistic(params.alpha + params.beta * current[i] + params.gamma * pressure);
      next[i] = rng.uniform(i) < p ? 1 : 0;
    }
    current.swap(next);
    if (k >= params.burn_in) {
      for (std::size_t i = 0; i < n; ++i) {
        out.set(k - params.burn_in, i, current[i] != 0 ? TrafficState::congested : TrafficState::fluid);
      }
    }
  }
  return out;
}

ObservationSet sample_probes(const HistoryMatrix& history, const ProbeParams& probes,
                             std::size_t first_row, std::size_t layers) {
  check_probability("probe coverage", probes.coverage);
  check_probability("probe flip probability", probes.flip);
  if (layers < 1 || first_row > history.rows() || layers > history.rows() - first_row) {
    throw ParameterError("probe window [" + std::to_string(first_row) + ", " +
                         std::to_string(first_row + layers) + ") outside history of " +
                         std::to_string(history.rows()) + " rows");
  }
  const CounterRng coverage(probes.seed, kCoverageStream);
  const CounterRng flip(probes.seed, kFlipStream);
  const std::size_t cols = history.cols();
  ObservationSet out;
  for (std::size_t t = 0; t < layers; ++t) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto truth = history.state(first_row + t, c);
      const std::uint64_t cell = (first_row + t) * cols + c;
      if (!truth || !(coverage.uniform(cell) < probes.coverage)) continue;
      TrafficState reported = *truth;
      if (flip.uniform(cell) < probes.flip) {
        reported = reported == TrafficState::fluid ? TrafficState::congested : TrafficState::fluid;
      }
      out.add(t * cols + c, reported);
    }
  }
  return out;
}

}  // namespace trafficbp
