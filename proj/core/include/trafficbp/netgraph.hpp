#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trafficbp/diagnostics.hpp"

namespace trafficbp {

/// Road segments and the symmetric "shares an intersection" relation between
/// them. Segments are the nodes here; the traffic variables live on them.
///
/// This is a plain aggregate so that files can be loaded and then checked
/// with validate_graph(); build_space_time() refuses invalid graphs.
struct RoadGraph {
  std::vector<std::string> segments;
  std::vector<std::pair<std::string, std::string>> adjacency;

  bool operator==(const RoadGraph&) const = default;
};

/// Duplicate ids, dangling references, self-pairs and duplicate pairs are
/// errors; a disconnected graph is only a warning.
Diagnostics validate_graph(const RoadGraph& graph);

enum class GraphKind { ring, grid, random_regular };

struct GraphSpec {
  GraphKind kind = GraphKind::ring;
  std::size_t n = 0;       // ring / random-regular segment count
  std::size_t rows = 0;    // grid only
  std::size_t cols = 0;    // grid only
  std::size_t degree = 0;  // random-regular only
  std::uint64_t seed = 0;  // random-regular only
};

/// Generates a simple connected test network. Segment ids are "s0", "s1", ...
/// Random-regular graphs use the configuration (pairing) model, rejecting
/// pairings with self or multi edges and disconnected results; attempt k uses
/// derive_seed(seed, k). Throws ParameterError on infeasible parameters.
RoadGraph gen_graph(const GraphSpec& spec);

std::optional<GraphKind> parse_graph_kind(std::string_view name);

enum class EdgeKind : std::uint8_t { spatial, temporal };

/// An edge of the space-time MRF. `first < second`; `klass` is the adjacency
/// pair index for spatial edges and the segment index for temporal edges.
struct SpaceTimeEdge {
  std::size_t first;
  std::size_t second;
  EdgeKind kind;
  std::size_t klass;
};

/// Layered variable graph over (segment, layer).
///
/// Variable ids are layer-major: id = layer * N + segment, where segment is
/// the position in RoadGraph::segments. Edges are listed spatial first
/// (layer by layer, adjacency order within a layer) and then temporal
/// (layer pair (t, t+1) by t, segment order within).
class SpaceTimeIndex {
 public:
  SpaceTimeIndex(RoadGraph graph, std::size_t layers);

  const RoadGraph& graph() const noexcept { return graph_; }
  std::size_t segment_count() const noexcept { return graph_.segments.size(); }
  std::size_t layers() const noexcept { return layers_; }
  std::size_t variable_count() const noexcept { return segment_count() * layers_; }

  std::size_t variable(std::size_t segment, std::size_t layer) const noexcept {
    return layer * segment_count() + segment;
  }
  std::size_t segment_of(std::size_t variable) const noexcept {
    return variable % segment_count();
  }
  std::size_t layer_of(std::size_t variable) const noexcept {
    return variable / segment_count();
  }

  std::optional<std::size_t> segment_index(std::string_view id) const;

  /// Adjacency pairs as segment indices with first < second, in file order.
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept {
    return pairs_;
  }
  /// Adjacency pair indices incident to each segment.
  const std::vector<std::vector<std::size_t>>& incident_pairs() const noexcept {
    return incident_pairs_;
  }

  const std::vector<SpaceTimeEdge>& edges() const noexcept { return edges_; }
  std::size_t spatial_edge_count() const noexcept { return pairs_.size() * layers_; }
  std::size_t temporal_edge_count() const noexcept {
    return segment_count() * (layers_ - 1);
  }

  /// Number of MRF edges touching a variable.
  std::size_t degree(std::size_t variable) const noexcept;

 private:
  RoadGraph graph_;
  std::size_t layers_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::vector<std::size_t>> incident_pairs_;
  std::vector<SpaceTimeEdge> edges_;
};

/// Throws ParameterError if T == 0 or the graph has validation errors.
SpaceTimeIndex build_space_time(const RoadGraph& graph, std::size_t layers);

}  // namespace trafficbp
