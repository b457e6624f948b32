#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "trafficbp/errors.hpp"
#include "trafficbp/io.hpp"

namespace trafficbp {

namespace {

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  /// Next non-empty line split on commas; false at end of input.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string_view field, const std::string& what) const {
    throw DataError(std::string(source_) + ":" + std::to_string(line_) + ": field '" +
                    std::string(field) + "': " + what);
  }

  void expect_header(const std::vector<std::string>& want) {
    std::vector<std::string> fields;
    if (!next(fields)) throw DataError(std::string(source_) + ": empty file, expected a header");
    if (fields != want) {
      std::string joined;
      for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
      fail("header", "expected '" + joined + "'");
    }
  }

  void expect_width(const std::vector<std::string>& fields, std::size_t width) const {
    if (fields.size() != width) {
      fail("row", "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
  }

  std::size_t index_value(const std::string& text, std::string_view field) const {
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
      fail(field, "expected a non-negative integer, got '" + text + "'");
    }
    return value;
  }

  double real_value(const std::string& text, std::string_view field) const {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
      fail(field, "expected a finite number, got '" + text + "'");
    }
    return value;
  }

  TrafficState state_value(const std::string& text, std::string_view field) const {
    if (text == "0") return TrafficState::fluid;
    if (text == "1") return TrafficState::congested;
    fail(field, "expected 0 or 1, got '" + text + "'");
  }

  std::size_t segment_value(const std::string& text, const SpaceTimeIndex& index) const {
    const auto s = index.segment_index(text);
    if (!s) fail("segment", "unknown segment '" + text + "'");
    return *s;
  }

  std::size_t layer_value(const std::string& text, const SpaceTimeIndex& index) const {
    const std::size_t t = index_value(text, "layer");
    if (t >= index.layers()) {
      fail("layer", std::to_string(t) + " outside model of " + std::to_string(index.layers()) + " layers");
    }
    return t;
  }

 private:
  std::istream& in_;
  std::string_view source_;
  std::size_t line_ = 0;
};

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

bool is_valid_segment_id(std::string_view id) noexcept {
  if (id.empty()) return false;
  for (const char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

HistoryMatrix read_history(std::istream& in, std::string_view source) {
  CsvReader csv(in, source);
  std::vector<std::string> header;
  if (!csv.next(header)) throw DataError(std::string(source) + ": empty file, expected a header");
  if (header.empty() || header.front() != "t") csv.fail("header", "first column must be 't'");
  std::vector<std::string> columns(header.begin() + 1, header.end());
  for (const auto& c : columns) {
    if (!is_valid_segment_id(c)) csv.fail("header", "invalid segment id '" + c + "'");
  }

  std::vector<std::vector<std::int8_t>> rows;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_width(fields, header.size());
    if (csv.index_value(fields[0], "t") != rows.size()) {
      csv.fail("t", "expected row index " + std::to_string(rows.size()));
    }
    std::vector<std::int8_t> row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = fields[c + 1];
      row[c] = cell.empty() ? HistoryMatrix::kMissing
                            : static_cast<std::int8_t>(csv.state_value(cell, columns[c]));
    }
    rows.push_back(std::move(row));
  }

  HistoryMatrix out(std::move(columns), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] != HistoryMatrix::kMissing) out.set(r, c, static_cast<TrafficState>(rows[r][c]));
    }
  }
  return out;
}

void write_history(std::ostream& out, const HistoryMatrix& history) {
  std::string line = "t";
  for (const auto& c : history.columns()) line += "," + c;
  out << line << '\n';
  for (std::size_t r = 0; r < history.rows(); ++r) {
    line = std::to_string(r);
    for (std::size_t c = 0; c < history.cols(); ++c) {
      line += ',';
      const auto cell = history.at(r, c);
      if (cell != HistoryMatrix::kMissing) line += static_cast<char>('0' + cell);
    }
    out << line << '\n';
  }
}

ObservationSet read_observations(std::istream& in, std::string_view source,
                                 const SpaceTimeIndex& index) {
  CsvReader csv(in, source);
  csv.expect_header({"layer", "segment", "state"});
  ObservationSet out;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_width(fields, 3);
    const std::size_t t = csv.layer_value(fields[0], index);
    const std::size_t s = csv.segment_value(fields[1], index);
    const TrafficState state = csv.state_value(fields[2], "state");
    try {
      out.add(index.variable(s, t), state);
    } catch (const DataError&) {
      csv.fail("state", "conflicts with an earlier observation of (" + fields[0] + ", " + fields[1] + ")");
    }
  }
  return out;
}

void write_observations(std::ostream& out, const ObservationSet& observations,
                        const SpaceTimeIndex& index) {
  out << "layer,segment,state\n";
  for (const auto& [v, state] : observations.entries()) {
    out << index.layer_of(v) << ',' << index.graph().segments[index.segment_of(v)] << ','
        << to_int(state) << '\n';
  }
}

std::vector<double> read_beliefs(std::istream& in, std::string_view source,
                                 const SpaceTimeIndex& index) {
  CsvReader csv(in, source);
  csv.expect_header({"layer", "segment", "p_congested"});
  std::vector<double> p(index.variable_count(), -1.0);
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_width(fields, 3);
    const std::size_t v = index.variable(csv.segment_value(fields[1], index),
                                         csv.layer_value(fields[0], index));
    const double value = csv.real_value(fields[2], "p_congested");
    if (value < 0.0 || value > 1.0) csv.fail("p_congested", "outside [0, 1]");
    if (p[v] >= 0.0) csv.fail("segment", "duplicate belief for (" + fields[0] + ", " + fields[1] + ")");
    p[v] = value;
  }
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (p[v] < 0.0) {
      throw DataError(std::string(source) + ": missing belief for segment '" +
                      index.graph().segments[index.segment_of(v)] + "' layer " +
                      std::to_string(index.layer_of(v)));
    }
  }
  return p;
}

void write_beliefs(std::ostream& out, std::span<const double> p_congested,
                   const SpaceTimeIndex& index) {
  if (p_congested.size() != index.variable_count()) {
    throw ParameterError("write_beliefs: " + std::to_string(p_congested.size()) +
                         " beliefs for " + std::to_string(index.variable_count()) + " variables");
  }
  out << "layer,segment,p_congested\n";
  for (std::size_t v = 0; v < p_congested.size(); ++v) {
    out << index.layer_of(v) << ',' << index.graph().segments[index.segment_of(v)] << ','
        << format_double(p_congested[v]) << '\n';
  }
}

std::vector<PhasePoint> read_phase_scan(std::istream& in, std::string_view source) {
  CsvReader csv(in, source);
  csv.expect_header({"J", "abs_magnetization", "converged"});
  std::vector<PhasePoint> out;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_width(fields, 3);
    PhasePoint p{csv.real_value(fields[0], "J"), csv.real_value(fields[1], "abs_magnetization"), false};
    if (fields[2] == "true") {
      p.converged = true;
    } else if (fields[2] != "false") {
      csv.fail("converged", "expected true or false, got '" + fields[2] + "'");
    }
    out.push_back(p);
  }
  return out;
}

void write_phase_scan(std::ostream& out, std::span<const PhasePoint> points) {
  out << "J,abs_magnetization,converged\n";
  for (const auto& p : points) {
    out << format_double(p.coupling) << ',' << format_double(p.abs_magnetization) << ','
        << (p.converged ? "true" : "false") << '\n';
  }
}

}  // namespace trafficbp
