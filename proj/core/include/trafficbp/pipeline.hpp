#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "trafficbp/calibrate.hpp"
#include "trafficbp/history.hpp"
#include "trafficbp/mrf.hpp"
#include "trafficbp/propagate.hpp"

namespace trafficbp {

/// Layers [0, observed_layers) are reconstruction layers, the rest are the
/// prediction horizon.
struct WindowSpec {
  std::size_t layers = 6;
  std::size_t observed_layers = 4;
};

void validate(const WindowSpec& window);

struct Reconstruction {
  Beliefs beliefs;  // every variable; clamped ones are point masses
  BpReport report;
};

Reconstruction reconstruct(const PairwiseModel& model, const ObservationSet& observations,
                           const BpParams& params);

inline constexpr double kLogLossClip = 1e-12;

struct Score {
  double error_rate = 0.0;
  double brier = 0.0;
  double log_loss = 0.0;
  std::size_t count = 0;
};

enum class LayerRole { reconstruction, prediction };
std::string_view to_string(LayerRole role) noexcept;

struct LayerMetrics {
  std::size_t layer;
  LayerRole role;
  Score hidden;
  Score observed;
};

struct Metrics {
  std::vector<LayerMetrics> layers;
  Score hidden;
  Score observed;
  Score all;
};

/// Scores p_congested (variable id = layer * N + segment) against a truth
/// window whose rows are layers. Threshold 0.5, ties classify as fluid.
/// Missing truth cells are skipped. Throws ParameterError on shape mismatch.
Metrics evaluate(std::span<const double> p_congested, const HistoryMatrix& truth,
                 const ObservationSet& observations, const WindowSpec& window);

/// Climatology: each variable gets its segment class's empirical P(x = 1).
Beliefs baseline_marginal(const MomentSet& moments, const SpaceTimeIndex& index);

}  // namespace trafficbp
