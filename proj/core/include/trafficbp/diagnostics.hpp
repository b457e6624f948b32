#pragma once

#include <string>
#include <vector>

namespace trafficbp {

enum class Severity { warning, error };

enum class DiagnosticKind {
  duplicate_id,
  dangling_reference,
  self_pair,
  duplicate_pair,
  disconnected,
  non_finite,
  out_of_range,
  size_mismatch,
};

struct Diagnostic {
  Severity severity;
  DiagnosticKind kind;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& diagnostics) noexcept;
bool contains(const Diagnostics& diagnostics, DiagnosticKind kind) noexcept;

/// One diagnostic per line, prefixed by "error: " or "warning: ".
std::string to_string(const Diagnostics& diagnostics);

}  // namespace trafficbp
