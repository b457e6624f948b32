#include "trafficbp/diagnostics.hpp"

#include <algorithm>

namespace trafficbp {

bool has_errors(const Diagnostics& diagnostics) noexcept {
  return std::ranges::any_of(diagnostics,
                             [](const Diagnostic& d) { return d.severity == Severity::error; });
}

bool contains(const Diagnostics& diagnostics, DiagnosticKind kind) noexcept {
  return std::ranges::any_of(diagnostics, [kind](const Diagnostic& d) { return d.kind == kind; });
}

std::string to_string(const Diagnostics& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    out += d.severity == Severity::error ? "error: " : "warning: ";
    out += d.message;
    out += '\n';
  }
  return out;
}

}  // namespace trafficbp
