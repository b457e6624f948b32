#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"
#include "trafficbp/errors.hpp"
#include "trafficbp/io.hpp"

namespace trafficbp {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(std::string_view source, const std::string& what) {
  throw DataError(std::string(source) + ": " + what);
}

Json parse(std::istream& in, std::string_view source) {
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(source, std::string("malformed JSON: ") + e.what());
  }
}

void require_keys(const Json& obj, std::string_view source, std::string_view where,
                  std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) fail(source, std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      fail(source, std::string(where) + ": unknown key '" + key + "'");
    }
  }
  for (const auto key : keys) {
    if (!obj.contains(key)) fail(source, std::string(where) + ": missing key '" + std::string(key) + "'");
  }
}

const Json& field(const Json& obj, std::string_view source, std::string_view where,
                  const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(source, std::string(where) + ": missing key '" + key + "'");
  return *it;
}

std::string segment_id(const Json& value, std::string_view source, const std::string& where) {
  if (!value.is_string()) fail(source, where + ": expected a segment id string");
  auto id = value.get<std::string>();
  if (!is_valid_segment_id(id)) fail(source, where + ": invalid segment id '" + id + "'");
  return id;
}

double number(const Json& value, std::string_view source, const std::string& where) {
  if (!value.is_number()) fail(source, where + ": expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) fail(source, where + ": not finite");
  return x;
}

std::size_t count_value(const Json& value, std::string_view source, const std::string& where) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    fail(source, where + ": expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

const Json& array_field(const Json& obj, std::string_view source, const char* key) {
  const Json& a = field(obj, source, "top level", key);
  if (!a.is_array()) fail(source, std::string("field '") + key + "': expected an array");
  return a;
}

std::vector<std::string> segment_list(const Json& obj, std::string_view source) {
  std::vector<std::string> out;
  const Json& segments = array_field(obj, source, "segments");
  for (std::size_t k = 0; k < segments.size(); ++k) {
    out.push_back(segment_id(segments[k], source, "segments[" + std::to_string(k) + "]"));
  }
  return out;
}

void emit(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

}  // namespace

RoadGraph read_graph(std::istream& in, std::string_view source) {
  const Json doc = parse(in, source);
  require_keys(doc, source, "top level", {"segments", "adjacency"});
  RoadGraph graph;
  graph.segments = segment_list(doc, source);
  const Json& adjacency = array_field(doc, source, "adjacency");
  for (std::size_t k = 0; k < adjacency.size(); ++k) {
    const std::string where = "adjacency[" + std::to_string(k) + "]";
    const Json& pair = adjacency[k];
    if (!pair.is_array() || pair.size() != 2) fail(source, where + ": expected [id, id]");
    graph.adjacency.emplace_back(segment_id(pair[0], source, where),
                                 segment_id(pair[1], source, where));
  }
  return graph;
}

void write_graph(std::ostream& out, const RoadGraph& graph) {
  Json doc;
  doc["segments"] = graph.segments;
  doc["adjacency"] = Json::array();
  for (const auto& [a, b] : graph.adjacency) doc["adjacency"].push_back({a, b});
  emit(out, doc);
}

SpaceTimeModel read_model(std::istream& in, std::string_view source) {
  const Json doc = parse(in, source);
  require_keys(doc, source, "top level", {"layers", "segments", "spatial_J", "temporal_J", "fields"});
  const std::size_t layers = count_value(doc["layers"], source, "field 'layers'");

  RoadGraph graph;
  graph.segments = segment_list(doc, source);
  std::vector<double> spatial;
  const Json& spatial_json = array_field(doc, source, "spatial_J");
  for (std::size_t k = 0; k < spatial_json.size(); ++k) {
    const std::string where = "spatial_J[" + std::to_string(k) + "]";
    const Json& entry = spatial_json[k];
    require_keys(entry, source, where, {"a", "b", "J"});
    graph.adjacency.emplace_back(segment_id(entry["a"], source, where + ".a"),
                                 segment_id(entry["b"], source, where + ".b"));
    spatial.push_back(number(entry["J"], source, where + ".J"));
  }

  std::optional<SpaceTimeIndex> index;
  try {
    index.emplace(graph, layers);
  } catch (const ParameterError& e) {
    fail(source, e.what());
  }
  const std::size_t n = index->segment_count();

  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> temporal(n, kUnset);
  const Json& temporal_json = array_field(doc, source, "temporal_J");
  for (std::size_t k = 0; k < temporal_json.size(); ++k) {
    const std::string where = "temporal_J[" + std::to_string(k) + "]";
    const Json& entry = temporal_json[k];
    require_keys(entry, source, where, {"segment", "J"});
    const auto id = segment_id(entry["segment"], source, where + ".segment");
    const auto s = index->segment_index(id);
    if (!s) fail(source, where + ".segment: unknown segment '" + id + "'");
    if (!std::isnan(temporal[*s])) fail(source, where + ": duplicate entry for '" + id + "'");
    temporal[*s] = number(entry["J"], source, where + ".J");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (std::isnan(temporal[s])) {
      fail(source, "temporal_J: missing entry for segment '" + index->graph().segments[s] + "'");
    }
  }

  std::vector<double> fields(index->variable_count(), kUnset);
  const Json& fields_json = array_field(doc, source, "fields");
  for (std::size_t k = 0; k < fields_json.size(); ++k) {
    const std::string where = "fields[" + std::to_string(k) + "]";
    const Json& entry = fields_json[k];
    require_keys(entry, source, where, {"segment", "layer", "h"});
    const auto id = segment_id(entry["segment"], source, where + ".segment");
    const auto s = index->segment_index(id);
    if (!s) fail(source, where + ".segment: unknown segment '" + id + "'");
    const std::size_t t = count_value(entry["layer"], source, where + ".layer");
    if (t >= layers) fail(source, where + ".layer: " + std::to_string(t) + " >= layers");
    const std::size_t v = index->variable(*s, t);
    if (!std::isnan(fields[v])) fail(source, where + ": duplicate field for (" + id + ", " + std::to_string(t) + ")");
    fields[v] = number(entry["h"], source, where + ".h");
  }
  for (std::size_t v = 0; v < fields.size(); ++v) {
    if (std::isnan(fields[v])) {
      fail(source, "fields: missing entry for segment '" +
                       index->graph().segments[index->segment_of(v)] + "' layer " +
                       std::to_string(index->layer_of(v)));
    }
  }
  return SpaceTimeModel{std::move(*index), std::move(spatial), std::move(temporal), std::move(fields)};
}

void write_model(std::ostream& out, const SpaceTimeModel& model) {
  const auto& index = model.index;
  const auto& graph = index.graph();
  Json doc;
  doc["layers"] = index.layers();
  doc["segments"] = graph.segments;
  doc["spatial_J"] = Json::array();
  for (std::size_t k = 0; k < graph.adjacency.size(); ++k) {
    doc["spatial_J"].push_back(
        {{"a", graph.adjacency[k].first}, {"b", graph.adjacency[k].second}, {"J", model.spatial_coupling[k]}});
  }
  doc["temporal_J"] = Json::array();
  for (std::size_t s = 0; s < index.segment_count(); ++s) {
    doc["temporal_J"].push_back({{"segment", graph.segments[s]}, {"J", model.temporal_coupling[s]}});
  }
  doc["fields"] = Json::array();
  for (std::size_t v = 0; v < index.variable_count(); ++v) {
    doc["fields"].push_back({{"segment", graph.segments[index.segment_of(v)]},
                             {"layer", index.layer_of(v)},
                             {"h", model.field[v]}});
  }
  emit(out, doc);
}

BpReport read_bp_report(std::istream& in, std::string_view source) {
  const Json doc = parse(in, source);
  require_keys(doc, source, "top level", {"converged", "iterations", "residual"});
  if (!doc["converged"].is_boolean()) fail(source, "field 'converged': expected a boolean");
  BpReport report;
  report.converged = doc["converged"].get<bool>();
  report.iterations = count_value(doc["iterations"], source, "field 'iterations'");
  report.residual = number(doc["residual"], source, "field 'residual'");
  return report;
}

namespace {
Json report_json(const BpReport& report) {
  return {{"converged", report.converged},
          {"iterations", report.iterations},
          {"residual", report.residual}};
}

Json score_json(const Score& s) {
  return {{"error_rate", s.error_rate}, {"brier", s.brier}, {"log_loss", s.log_loss}, {"count", s.count}};
}
}  // namespace

void write_bp_report(std::ostream& out, const BpReport& report) { emit(out, report_json(report)); }

void write_metrics(std::ostream& out, const Metrics& metrics,
                   const std::optional<BpReport>& report) {
  Json doc;
  doc["layers"] = Json::array();
  for (const auto& layer : metrics.layers) {
    doc["layers"].push_back({{"layer", layer.layer},
                             {"role", std::string(to_string(layer.role))},
                             {"hidden", score_json(layer.hidden)},
                             {"observed", score_json(layer.observed)}});
  }
  doc["overall"] = {{"hidden", score_json(metrics.hidden)},
                    {"observed", score_json(metrics.observed)},
                    {"all", score_json(metrics.all)}};
  doc["bp"] = report ? report_json(*report) : Json(nullptr);
  emit(out, doc);
}

}  // namespace trafficbp
