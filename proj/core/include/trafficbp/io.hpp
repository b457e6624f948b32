#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trafficbp/history.hpp"
#include "trafficbp/mrf.hpp"
#include "trafficbp/netgraph.hpp"
#include "trafficbp/pipeline.hpp"
#include "trafficbp/propagate.hpp"

namespace trafficbp {

/// "%.17g": enough digits to round-trip any double.
std::string format_double(double value);

/// Segment ids must match [A-Za-z0-9_-]+ so CSV needs no quoting.
bool is_valid_segment_id(std::string_view id) noexcept;

// Readers throw DataError with a message naming `source`, the line (CSV) and
// the offending field. Writers emit LF line endings only.

// {"segments": [...], "adjacency": [["a","b"], ...]}; unknown keys rejected.
RoadGraph read_graph(std::istream& in, std::string_view source);
void write_graph(std::ostream& out, const RoadGraph& graph);

// {"layers": T, "segments": [...], "spatial_J": [{"a","b","J"}],
//  "temporal_J": [{"segment","J"}], "fields": [{"segment","layer","h"}]}
SpaceTimeModel read_model(std::istream& in, std::string_view source);
void write_model(std::ostream& out, const SpaceTimeModel& model);

// "t,<seg1>,<seg2>,..." with cells "0", "1" or empty.
HistoryMatrix read_history(std::istream& in, std::string_view source);
void write_history(std::ostream& out, const HistoryMatrix& history);

// "layer,segment,state"
ObservationSet read_observations(std::istream& in, std::string_view source,
                                 const SpaceTimeIndex& index);
void write_observations(std::ostream& out, const ObservationSet& observations,
                        const SpaceTimeIndex& index);

// "layer,segment,p_congested"; every variable exactly once.
std::vector<double> read_beliefs(std::istream& in, std::string_view source,
                                 const SpaceTimeIndex& index);
void write_beliefs(std::ostream& out, std::span<const double> p_congested,
                   const SpaceTimeIndex& index);

// "J,abs_magnetization,converged"
std::vector<PhasePoint> read_phase_scan(std::istream& in, std::string_view source);
void write_phase_scan(std::ostream& out, std::span<const PhasePoint> points);

// {"converged","iterations","residual"}; wall time is not written.
BpReport read_bp_report(std::istream& in, std::string_view source);
void write_bp_report(std::ostream& out, const BpReport& report);

/// Metrics JSON; "bp" is null when no report is given.
void write_metrics(std::ostream& out, const Metrics& metrics,
                   const std::optional<BpReport>& report);

}  // namespace trafficbp
