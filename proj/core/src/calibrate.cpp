#include "trafficbp/calibrate.hpp"

#include <cmath>
#include <string>

#include "trafficbp/errors.hpp"

namespace trafficbp {

namespace {

std::vector<std::size_t> column_of_segment(const HistoryMatrix& history,
                                           const SpaceTimeIndex& index) {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> column(index.segment_count(), kUnset);
  for (std::size_t c = 0; c < history.cols(); ++c) {
    const auto s = index.segment_index(history.columns()[c]);
    if (!s) throw DataError("history column '" + history.columns()[c] + "' is not a graph segment");
    if (column[*s] != kUnset) {
      throw DataError("history column '" + history.columns()[c] + "' appears twice");
    }
    column[*s] = c;
  }
  for (std::size_t s = 0; s < column.size(); ++s) {
    if (column[s] == kUnset) {
      throw DataError("history has no column for segment '" + index.graph().segments[s] + "'");
    }
  }
  return column;
}

SingletonMoment smooth(const std::array<double, 2>& counts, double lambda) {
  const double n = counts[0] + counts[1];
  const double z = n + 2.0 * lambda;
  return {{(counts[0] + lambda) / z, (counts[1] + lambda) / z}, n};
}

JointTable smooth(const JointTable& counts, double lambda, double& total) {
  total = counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  const double z = total + 4.0 * lambda;
  JointTable t{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) t[a][b] = (counts[a][b] + lambda) / z;
  }
  return t;
}

void require_positive(const JointTable& t) {
  for (const auto& row : t) {
    for (const double cell : row) {
      if (!(cell > 0.0) || !std::isfinite(cell)) {
        throw NumericDomainError("Bethe inversion needs strictly positive pair tables, got cell " +
                                 std::to_string(cell));
      }
    }
  }
}

std::size_t spatial_count(const MomentSet& m) {
  std::size_t k = 0;
  while (k < m.pairs.size() && m.pairs[k].kind == EdgeKind::spatial) ++k;
  return k;
}

}  // namespace

std::span<const PairMoment> MomentSet::spatial() const noexcept {
  return std::span(pairs).first(spatial_count(*this));
}

std::span<const PairMoment> MomentSet::temporal() const noexcept {
  return std::span(pairs).subspan(spatial_count(*this));
}

MomentSet estimate_moments(const HistoryMatrix& history, const SpaceTimeIndex& index,
                           double pseudocount) {
  if (!(pseudocount > 0.0) || !std::isfinite(pseudocount)) {
    throw ParameterError("pseudocount must be > 0, got " + std::to_string(pseudocount));
  }
  if (history.rows() == 0) throw DataError("history has no rows");
  const auto column = column_of_segment(history, index);
  const std::size_t n = index.segment_count();

  MomentSet out;
  out.pseudocount = pseudocount;
  out.singletons.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::array<double, 2> counts{};
    for (std::size_t r = 0; r < history.rows(); ++r) {
      const auto cell = history.at(r, column[s]);
      if (cell != HistoryMatrix::kMissing) counts[cell] += 1.0;
    }
    out.singletons.push_back(smooth(counts, pseudocount));
  }

  out.pairs.reserve(index.pairs().size() + n);
  for (const auto& [a, b] : index.pairs()) {
    JointTable counts{};
    for (std::size_t r = 0; r < history.rows(); ++r) {
      const auto xa = history.at(r, column[a]);
      const auto xb = history.at(r, column[b]);
      if (xa != HistoryMatrix::kMissing && xb != HistoryMatrix::kMissing) counts[xa][xb] += 1.0;
    }
    PairMoment m{a, b, EdgeKind::spatial, {}, 0.0};
    m.table = smooth(counts, pseudocount, m.count);
    out.pairs.push_back(m);
  }
  for (std::size_t s = 0; s < n; ++s) {
    JointTable counts{};
    for (std::size_t r = 0; r + 1 < history.rows(); ++r) {
      const auto now = history.at(r, column[s]);
      const auto next = history.at(r + 1, column[s]);
      if (now != HistoryMatrix::kMissing && next != HistoryMatrix::kMissing) counts[now][next] += 1.0;
    }
    PairMoment m{s, s, EdgeKind::temporal, {}, 0.0};
    m.table = smooth(counts, pseudocount, m.count);
    out.pairs.push_back(m);
  }
  return out;
}

double bethe_coupling(const JointTable& pair) {
  require_positive(pair);
  return 0.25 * std::log((pair[0][0] * pair[1][1]) / (pair[0][1] * pair[1][0]));
}

double bethe_field(const StateTable& single, std::span<const JointTable> incident) {
  if (!(single[0] > 0.0) || !(single[1] > 0.0)) {
    throw NumericDomainError("Bethe inversion needs strictly positive singleton tables");
  }
  const double degree = static_cast<double>(incident.size());
  double h = (1.0 - degree) * 0.5 * std::log(single[0] / single[1]);
  for (const auto& t : incident) {
    require_positive(t);
    h += 0.25 * std::log((t[0][0] * t[0][1]) / (t[1][0] * t[1][1]));
  }
  return h;
}

PairwiseModel bethe_inverse(const MomentSet& moments) {
  const std::size_t v = moments.singletons.size();
  std::vector<std::vector<JointTable>> incident(v);
  PairwiseModel model;
  model.edges.reserve(moments.pairs.size());
  for (const auto& p : moments.pairs) {
    if (p.a >= v || p.b >= v || p.a == p.b) {
      throw ParameterError("bethe_inverse: pair (" + std::to_string(p.a) + ", " +
                           std::to_string(p.b) + ") is not an edge between distinct variables");
    }
    model.edges.push_back({p.a, p.b, bethe_coupling(p.table)});
    incident[p.a].push_back(p.table);
    incident[p.b].push_back(transposed(p.table));
  }
  model.fields.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    model.fields.push_back(bethe_field(moments.singletons[i].table, incident[i]));
  }
  return model;
}

SpaceTimeModel calibrate_from_moments(const MomentSet& moments, const SpaceTimeIndex& index) {
  const std::size_t n = index.segment_count();
  const auto spatial = moments.spatial();
  const auto temporal = moments.temporal();
  if (moments.singletons.size() != n || spatial.size() != index.pairs().size() ||
      temporal.size() != n) {
    throw ParameterError("moment set does not match the space-time index layout");
  }

  SpaceTimeModel out{index, {}, {}, {}};
  out.spatial_coupling.reserve(spatial.size());
  for (const auto& p : spatial) out.spatial_coupling.push_back(bethe_coupling(p.table));
  out.temporal_coupling.reserve(n);
  for (const auto& p : temporal) out.temporal_coupling.push_back(bethe_coupling(p.table));

  out.field.resize(index.variable_count());
  std::vector<JointTable> incident;
  for (std::size_t t = 0; t < index.layers(); ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      incident.clear();
      for (const std::size_t k : index.incident_pairs()[s]) {
        incident.push_back(spatial[k].a == s ? spatial[k].table : transposed(spatial[k].table));
      }
      if (t + 1 < index.layers()) incident.push_back(temporal[s].table);
      if (t > 0) incident.push_back(transposed(temporal[s].table));
      out.field[index.variable(s, t)] = bethe_field(moments.singletons[s].table, incident);
    }
  }
  return out;
}

SpaceTimeModel calibrate(const HistoryMatrix& history, const SpaceTimeIndex& index,
                         double pseudocount) {
  return calibrate_from_moments(estimate_moments(history, index, pseudocount), index);
}

}  // namespace trafficbp
