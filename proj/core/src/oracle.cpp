#include "trafficbp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trafficbp/errors.hpp"
#include "trafficbp/rng.hpp"

namespace trafficbp {

namespace {

constexpr std::uint64_t kSampleStream = 0x5A3B;

void require_capacity(const PairwiseModel& model) {
  if (model.variable_count() > kMaxEnumerationVariables) {
    throw CapacityError("exact enumeration supports at most " +
                        std::to_string(kMaxEnumerationVariables) + " variables, model has " +
                        std::to_string(model.variable_count()));
  }
}

int spin_of(std::uint64_t config, std::size_t k) noexcept {
  return ((config >> k) & 1U) != 0 ? -1 : 1;
}

struct LogWeights {
  std::vector<double> values;  // -E(s) per configuration
  double log_partition;
};

LogWeights log_weights(const PairwiseModel& model) {
  require_capacity(model);
  const std::size_t v = model.variable_count();
  const std::uint64_t states = std::uint64_t{1} << v;
  LogWeights out{std::vector<double>(states), 0.0};
  double top = -INFINITY;
  for (std::uint64_t c = 0; c < states; ++c) {
    double w = 0.0;
    for (std::size_t i = 0; i < v; ++i) w += model.fields[i] * spin_of(c, i);
    for (const auto& e : model.edges) w += e.J * spin_of(c, e.i) * spin_of(c, e.j);
    out.values[c] = w;
    top = std::max(top, w);
  }
  double sum = 0.0;
  for (const double w : out.values) sum += std::exp(w - top);
  out.log_partition = top + std::log(sum);
  return out;
}

}  // namespace

std::vector<double> state_probabilities(const PairwiseModel& model) {
  auto lw = log_weights(model);
  for (double& w : lw.values) w = std::exp(w - lw.log_partition);
  return std::move(lw.values);
}

double log_partition(const PairwiseModel& model) { return log_weights(model).log_partition; }

ExactResult enumerate(const PairwiseModel& model) {
  const auto lw = log_weights(model);
  const std::size_t v = model.variable_count();
  ExactResult out;
  out.log_partition = lw.log_partition;
  out.p_congested.assign(v, 0.0);
  out.pairs.assign(model.edges.size(), JointTable{});
  for (std::uint64_t c = 0; c < lw.values.size(); ++c) {
    const double p = std::exp(lw.values[c] - lw.log_partition);
    for (std::size_t i = 0; i < v; ++i) {
      if (((c >> i) & 1U) != 0) out.p_congested[i] += p;
    }
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
      out.pairs[e][(c >> model.edges[e].i) & 1U][(c >> model.edges[e].j) & 1U] += p;
    }
  }
  return out;
}

MomentSet exact_moments(const PairwiseModel& model) {
  const auto exact = enumerate(model);
  MomentSet moments;
  moments.pseudocount = 0.0;
  moments.singletons.reserve(model.variable_count());
  for (const double p1 : exact.p_congested) moments.singletons.push_back({{1.0 - p1, p1}, 0.0});
  moments.pairs.reserve(model.edges.size());
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    moments.pairs.push_back(
        {model.edges[e].i, model.edges[e].j, EdgeKind::spatial, exact.pairs[e], 0.0});
  }
  return moments;
}

HistoryMatrix sample_exact(const PairwiseModel& model, std::size_t samples, std::uint64_t seed,
                           std::vector<std::string> columns) {
  const std::size_t v = model.variable_count();
  if (columns.empty()) {
    for (std::size_t k = 0; k < v; ++k) columns.push_back("v" + std::to_string(k));
  }
  if (columns.size() != v) {
    throw ParameterError("sample_exact: " + std::to_string(columns.size()) +
                         " column names for " + std::to_string(v) + " variables");
  }
  auto cdf = state_probabilities(model);
  for (std::size_t c = 1; c < cdf.size(); ++c) cdf[c] += cdf[c - 1];
  const double total = cdf.back();

  HistoryMatrix out(std::move(columns), samples);
  const CounterRng rng(seed, kSampleStream);
  for (std::size_t r = 0; r < samples; ++r) {
    const double target = rng.uniform(r) * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const auto config = static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    for (std::size_t k = 0; k < v; ++k) {
      out.set(r, k, ((config >> k) & 1U) != 0 ? TrafficState::congested : TrafficState::fluid);
    }
  }
  return out;
}

}  // namespace trafficbp
