#include "trafficbp/netgraph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "trafficbp/errors.hpp"
#include "trafficbp/rng.hpp"

namespace trafficbp {

namespace {

using IndexPair = std::pair<std::size_t, std::size_t>;

std::string segment_name(std::size_t i) { return "s" + std::to_string(i); }

RoadGraph named_graph(std::size_t n, const std::vector<IndexPair>& pairs) {
  RoadGraph g;
  g.segments.reserve(n);
  for (std::size_t i = 0; i < n; ++i) g.segments.push_back(segment_name(i));
  g.adjacency.reserve(pairs.size());
  for (const auto& [a, b] : pairs) g.adjacency.emplace_back(segment_name(a), segment_name(b));
  return g;
}

bool connected(std::size_t n, const std::vector<IndexPair>& pairs) {
  if (n == 0) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& [a, b] : pairs) {
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

RoadGraph ring(std::size_t n) {
  if (n < 3) throw ParameterError("ring needs n >= 3, got " + std::to_string(n));
  std::vector<IndexPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, (i + 1) % n);
  return named_graph(n, pairs);
}

RoadGraph grid(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) {
    throw ParameterError("grid needs rows, cols >= 2, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  std::vector<IndexPair> pairs;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t id = r * cols + c;
      if (c + 1 < cols) pairs.emplace_back(id, id + 1);
      if (r + 1 < rows) pairs.emplace_back(id, id + cols);
    }
  }
  return named_graph(rows * cols, pairs);
}

constexpr std::size_t kMaxPairingAttempts = 100000;

RoadGraph random_regular(std::size_t n, std::size_t degree, std::uint64_t seed) {
  if (degree == 0 || degree >= n) {
    throw ParameterError("random-regular needs 0 < degree < n, got degree " +
                         std::to_string(degree) + " with n " + std::to_string(n));
  }
  if ((n * degree) % 2 != 0) {
    throw ParameterError("random-regular needs n*degree even, got " + std::to_string(n) + "*" +
                         std::to_string(degree));
  }
  const std::size_t stub_count = n * degree;
  std::vector<std::size_t> stubs(stub_count);
  for (std::size_t attempt = 0; attempt < kMaxPairingAttempts; ++attempt) {
    for (std::size_t k = 0; k < stub_count; ++k) stubs[k] = k / degree;
    const CounterRng rng(derive_seed(seed, attempt), 0);
    for (std::size_t k = stub_count - 1; k > 0; --k) {
      std::swap(stubs[k], stubs[rng.below(k, k + 1)]);
    }
    std::vector<IndexPair> pairs;
    pairs.reserve(stub_count / 2);
    std::set<IndexPair> seen;
    bool simple = true;
    for (std::size_t k = 0; k < stub_count; k += 2) {
      auto a = stubs[k];
      auto b = stubs[k + 1];
      if (a == b) {
        simple = false;
        break;
      }
      if (a > b) std::swap(a, b);
      if (!seen.emplace(a, b).second) {
        simple = false;
        break;
      }
      pairs.emplace_back(a, b);
    }
    if (!simple || !connected(n, pairs)) continue;
    std::ranges::sort(pairs);
    return named_graph(n, pairs);
  }
  throw ParameterError("random-regular: no simple connected pairing found after " +
                       std::to_string(kMaxPairingAttempts) + " attempts");
}

}  // namespace

Diagnostics validate_graph(const RoadGraph& graph) {
  Diagnostics out;
  std::unordered_map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < graph.segments.size(); ++i) {
    if (!ids.emplace(graph.segments[i], i).second) {
      out.push_back({Severity::error, DiagnosticKind::duplicate_id,
                     "duplicate segment id '" + graph.segments[i] + "'"});
    }
  }
  std::set<IndexPair> seen;
  std::vector<IndexPair> resolved;
  for (const auto& [a, b] : graph.adjacency) {
    const auto ia = ids.find(a);
    const auto ib = ids.find(b);
    bool ok = true;
    for (const auto& [name, it] : {std::pair{a, ia}, std::pair{b, ib}}) {
      if (it == ids.end() && (ok || a != b)) {
        out.push_back({Severity::error, DiagnosticKind::dangling_reference,
                       "adjacency (" + a + ", " + b + ") references unknown segment '" + name +
                           "'"});
        ok = false;
      }
    }
    if (a == b) {
      out.push_back({Severity::error, DiagnosticKind::self_pair,
                     "adjacency (" + a + ", " + b + ") is a self-pair"});
      ok = false;
    }
    if (!ok) continue;
    const IndexPair key = std::minmax(ia->second, ib->second);
    if (!seen.insert(key).second) {
      out.push_back({Severity::error, DiagnosticKind::duplicate_pair,
                     "adjacency (" + a + ", " + b + ") is listed more than once"});
      continue;
    }
    resolved.push_back(key);
  }
  if (!connected(graph.segments.size(), resolved)) {
    out.push_back({Severity::warning, DiagnosticKind::disconnected, "graph is not connected"});
  }
  return out;
}

RoadGraph gen_graph(const GraphSpec& spec) {
  switch (spec.kind) {
    case GraphKind::ring:
      return ring(spec.n);
    case GraphKind::grid:
      return grid(spec.rows, spec.cols);
    case GraphKind::random_regular:
      return random_regular(spec.n, spec.degree, spec.seed);
  }
  throw ParameterError("unknown graph kind");
}

std::optional<GraphKind> parse_graph_kind(std::string_view name) {
  if (name == "ring") return GraphKind::ring;
  if (name == "grid") return GraphKind::grid;
  if (name == "random-regular") return GraphKind::random_regular;
  return std::nullopt;
}

SpaceTimeIndex::SpaceTimeIndex(RoadGraph graph, std::size_t layers)
    : graph_(std::move(graph)), layers_(layers) {
  if (layers_ == 0) throw ParameterError("space-time graph needs at least one layer");
  if (graph_.segments.empty()) throw ParameterError("road graph has no segments");
  const auto diagnostics = validate_graph(graph_);
  if (has_errors(diagnostics)) throw ParameterError("invalid road graph:\n" + to_string(diagnostics));

  const std::size_t n = graph_.segments.size();
  for (std::size_t i = 0; i < n; ++i) lookup_.emplace(graph_.segments[i], i);
  incident_pairs_.resize(n);
  pairs_.reserve(graph_.adjacency.size());
  for (const auto& [a, b] : graph_.adjacency) {
    const IndexPair p = std::minmax(lookup_.at(a), lookup_.at(b));
    incident_pairs_[p.first].push_back(pairs_.size());
    incident_pairs_[p.second].push_back(pairs_.size());
    pairs_.push_back(p);
  }

  edges_.reserve(spatial_edge_count() + temporal_edge_count());
  for (std::size_t t = 0; t < layers_; ++t) {
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      edges_.push_back({variable(pairs_[k].first, t), variable(pairs_[k].second, t),
                        EdgeKind::spatial, k});
    }
  }
  for (std::size_t t = 0; t + 1 < layers_; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      edges_.push_back({variable(s, t), variable(s, t + 1), EdgeKind::temporal, s});
    }
  }
}

std::optional<std::size_t> SpaceTimeIndex::segment_index(std::string_view id) const {
  const auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t SpaceTimeIndex::degree(std::size_t variable) const noexcept {
  const std::size_t t = layer_of(variable);
  const std::size_t temporal = (t > 0 ? 1 : 0) + (t + 1 < layers_ ? 1 : 0);
  return incident_pairs_[segment_of(variable)].size() + temporal;
}

SpaceTimeIndex build_space_time(const RoadGraph& graph, std::size_t layers) {
  return SpaceTimeIndex(graph, layers);
}

}  // namespace trafficbp
