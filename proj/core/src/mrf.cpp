#include "trafficbp/mrf.hpp"

#include <cmath>
#include <set>
#include <string>

#include "trafficbp/errors.hpp"

namespace trafficbp {

std::vector<std::size_t> degrees(const PairwiseModel& model) {
  std::vector<std::size_t> d(model.variable_count(), 0);
  for (const auto& e : model.edges) {
    ++d[e.i];
    ++d[e.j];
  }
  return d;
}

Diagnostics validate_model(const PairwiseModel& model) {
  Diagnostics out;
  const std::size_t v = model.variable_count();
  for (std::size_t i = 0; i < v; ++i) {
    if (!std::isfinite(model.fields[i])) {
      out.push_back({Severity::error, DiagnosticKind::non_finite,
                     "field h[" + std::to_string(i) + "] is not finite"});
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    const auto& e = model.edges[k];
    const std::string where =
        "edge " + std::to_string(k) + " (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")";
    if (!std::isfinite(e.J)) {
      out.push_back({Severity::error, DiagnosticKind::non_finite, where + ": coupling is not finite"});
    }
    if (e.i >= v || e.j >= v) {
      out.push_back({Severity::error, DiagnosticKind::out_of_range,
                     where + ": variable id out of range (V = " + std::to_string(v) + ")"});
    }
    if (e.i == e.j) {
      out.push_back({Severity::error, DiagnosticKind::self_pair, where + ": self-edge"});
      continue;
    }
    if (e.i > e.j) {
      out.push_back({Severity::error, DiagnosticKind::out_of_range, where + ": expected i < j"});
    }
    if (!seen.insert(std::minmax(e.i, e.j)).second) {
      out.push_back({Severity::error, DiagnosticKind::duplicate_pair, where + ": duplicate edge"});
    }
  }
  return out;
}

double energy(const PairwiseModel& model, std::span<const int> spins) {
  if (spins.size() != model.variable_count()) {
    throw ParameterError("energy: configuration has " + std::to_string(spins.size()) +
                         " spins, model has " + std::to_string(model.variable_count()));
  }
  double e = 0.0;
  for (const auto& c : model.edges) e -= c.J * spins[c.i] * spins[c.j];
  for (std::size_t i = 0; i < spins.size(); ++i) e -= model.fields[i] * spins[i];
  return e;
}

void ObservationSet::add(std::size_t variable, TrafficState state) {
  const auto [it, inserted] = entries_.emplace(variable, state);
  if (!inserted && it->second != state) {
    throw DataError("conflicting observations for variable " + std::to_string(variable));
  }
}

std::optional<TrafficState> ObservationSet::find(std::size_t variable) const {
  const auto it = entries_.find(variable);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ConditionedModel condition(const PairwiseModel& model, const ObservationSet& observations) {
  const std::size_t v = model.variable_count();
  ConditionedModel out;
  out.clamped.assign(v, std::nullopt);
  for (const auto& [var, state] : observations.entries()) {
    if (var >= v) {
      throw ParameterError("observation for variable " + std::to_string(var) +
                           " outside model of " + std::to_string(v) + " variables");
    }
    out.clamped[var] = state;
  }

  std::vector<double> fields = model.fields;
  for (const auto& e : model.edges) {
    const bool ci = out.clamped[e.i].has_value();
    const bool cj = out.clamped[e.j].has_value();
    if (ci && !cj) fields[e.j] += e.J * spin(*out.clamped[e.i]);
    if (cj && !ci) fields[e.i] += e.J * spin(*out.clamped[e.j]);
  }

  std::vector<std::size_t> renumber(v, 0);
  for (std::size_t i = 0; i < v; ++i) {
    if (out.clamped[i]) continue;
    renumber[i] = out.kept.size();
    out.kept.push_back(i);
    out.reduced.fields.push_back(fields[i]);
  }
  for (const auto& e : model.edges) {
    if (out.clamped[e.i] || out.clamped[e.j]) continue;
    out.reduced.edges.push_back({renumber[e.i], renumber[e.j], e.J});
  }
  return out;
}

PairwiseModel assemble_model(const SpaceTimeIndex& index,
                             std::span<const double> spatial_coupling,
                             std::span<const double> temporal_coupling,
                             std::span<const double> field) {
  auto check = [](std::string_view what, std::size_t got, std::size_t want) {
    if (got != want) {
      throw ParameterError("assemble_model: " + std::string(what) + " has " + std::to_string(got) +
                           " entries, expected " + std::to_string(want));
    }
  };
  check("spatial couplings", spatial_coupling.size(), index.pairs().size());
  check("temporal couplings", temporal_coupling.size(), index.segment_count());
  check("fields", field.size(), index.variable_count());

  PairwiseModel model;
  model.fields.assign(field.begin(), field.end());
  model.edges.reserve(index.edges().size());
  for (const auto& e : index.edges()) {
    const double j =
        e.kind == EdgeKind::spatial ? spatial_coupling[e.klass] : temporal_coupling[e.klass];
    model.edges.push_back({e.first, e.second, j});
  }
  return model;
}

PairwiseModel assemble_model(const SpaceTimeModel& model) {
  return assemble_model(model.index, model.spatial_coupling, model.temporal_coupling, model.field);
}

}  // namespace trafficbp
