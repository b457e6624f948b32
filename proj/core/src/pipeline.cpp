#include "trafficbp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trafficbp/errors.hpp"

namespace trafficbp {

namespace {

struct Accumulator {
  double errors = 0.0;
  double brier = 0.0;
  double log_loss = 0.0;
  std::size_t count = 0;

  void add(double p, int truth) {
    const int predicted = p > 0.5 ? 1 : 0;
    errors += predicted != truth ? 1.0 : 0.0;
    brier += (p - truth) * (p - truth);
    const double clipped = std::clamp(p, kLogLossClip, 1.0 - kLogLossClip);
    log_loss -= truth == 1 ? std::log(clipped) : std::log1p(-clipped);
    ++count;
  }

  Score score() const {
    if (count == 0) return {};
    const auto n = static_cast<double>(count);
    return {errors / n, brier / n, log_loss / n, count};
  }
};

}  // namespace

void validate(const WindowSpec& window) {
  if (window.observed_layers < 1 || window.observed_layers > window.layers) {
    throw ParameterError("window needs 1 <= T_obs <= T, got T_obs = " +
                         std::to_string(window.observed_layers) +
                         ", T = " + std::to_string(window.layers));
  }
}

std::string_view to_string(LayerRole role) noexcept {
  return role == LayerRole::reconstruction ? "reconstruction" : "prediction";
}

Reconstruction reconstruct(const PairwiseModel& model, const ObservationSet& observations,
                           const BpParams& params) {
  const ConditionedModel conditioned = condition(model, observations);
  const BpResult run = run_bp(conditioned.reduced, params);

  Reconstruction out;
  out.report = run.report;
  out.beliefs.p_congested.resize(model.variable_count());
  for (std::size_t i = 0; i < model.variable_count(); ++i) {
    if (const auto& state = conditioned.clamped[i]) {
      out.beliefs.p_congested[i] = *state == TrafficState::congested ? 1.0 : 0.0;
    }
  }
  for (std::size_t r = 0; r < conditioned.kept.size(); ++r) {
    out.beliefs.p_congested[conditioned.kept[r]] = run.beliefs.p_congested[r];
  }
  return out;
}

Metrics evaluate(std::span<const double> p_congested, const HistoryMatrix& truth,
                 const ObservationSet& observations, const WindowSpec& window) {
  validate(window);
  const std::size_t n = truth.cols();
  if (truth.rows() != window.layers) {
    throw ParameterError("truth window has " + std::to_string(truth.rows()) + " rows, expected " +
                         std::to_string(window.layers) + " layers");
  }
  if (p_congested.size() != n * window.layers) {
    throw ParameterError("got " + std::to_string(p_congested.size()) + " beliefs for " +
                         std::to_string(n * window.layers) + " cells");
  }

  Metrics out;
  Accumulator hidden_all;
  Accumulator observed_all;
  Accumulator everything;
  for (std::size_t t = 0; t < window.layers; ++t) {
    Accumulator hidden;
    Accumulator observed;
    for (std::size_t c = 0; c < n; ++c) {
      const auto state = truth.state(t, c);
      if (!state) continue;
      const std::size_t v = t * n + c;
      const double p = p_congested[v];
      const int x = to_int(*state);
      auto& bucket = observations.contains(v) ? observed : hidden;
      auto& total = observations.contains(v) ? observed_all : hidden_all;
      bucket.add(p, x);
      total.add(p, x);
      everything.add(p, x);
    }
    out.layers.push_back({t,
                          t < window.observed_layers ? LayerRole::reconstruction
                                                     : LayerRole::prediction,
                          hidden.score(), observed.score()});
  }
  out.hidden = hidden_all.score();
  out.observed = observed_all.score();
  out.all = everything.score();
  return out;
}

Beliefs baseline_marginal(const MomentSet& moments, const SpaceTimeIndex& index) {
  if (moments.singletons.size() != index.segment_count()) {
    throw ParameterError("baseline needs one singleton class per segment");
  }
  Beliefs out;
  out.p_congested.resize(index.variable_count());
  for (std::size_t v = 0; v < index.variable_count(); ++v) {
    out.p_congested[v] = moments.singletons[index.segment_of(v)].table[1];
  }
  return out;
}

}  // namespace trafficbp
