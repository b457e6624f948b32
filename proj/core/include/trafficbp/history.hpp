#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trafficbp/mrf.hpp"

namespace trafficbp {

/// Time-stamped binary congestion records: rows are time steps, columns are
/// segments. Cells hold 0, 1 or kMissing.
class HistoryMatrix {
 public:
  static constexpr std::int8_t kMissing = -1;

  HistoryMatrix() = default;
  /// All cells start missing.
  HistoryMatrix(std::vector<std::string> columns, std::size_t rows);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }

  std::int8_t at(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
  bool present(std::size_t row, std::size_t col) const { return at(row, col) != kMissing; }
  std::optional<TrafficState> state(std::size_t row, std::size_t col) const;

  void set(std::size_t row, std::size_t col, TrafficState state);
  void set_missing(std::size_t row, std::size_t col);

  /// Rows [first, first + count). Throws ParameterError when out of bounds.
  HistoryMatrix slice(std::size_t first, std::size_t count) const;

  bool operator==(const HistoryMatrix&) const = default;

 private:
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
  std::vector<std::int8_t> cells_;
};

}  // namespace trafficbp
