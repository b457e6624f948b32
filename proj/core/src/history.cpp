#include "trafficbp/history.hpp"

#include <string>

#include "trafficbp/errors.hpp"

namespace trafficbp {

HistoryMatrix::HistoryMatrix(std::vector<std::string> columns, std::size_t rows)
    : columns_(std::move(columns)), rows_(rows), cells_(rows_ * columns_.size(), kMissing) {}

std::optional<TrafficState> HistoryMatrix::state(std::size_t row, std::size_t col) const {
  const auto cell = at(row, col);
  if (cell == kMissing) return std::nullopt;
  return static_cast<TrafficState>(cell);
}

void HistoryMatrix::set(std::size_t row, std::size_t col, TrafficState state) {
  cells_[row * cols() + col] = static_cast<std::int8_t>(state);
}

void HistoryMatrix::set_missing(std::size_t row, std::size_t col) {
  cells_[row * cols() + col] = kMissing;
}

HistoryMatrix HistoryMatrix::slice(std::size_t first, std::size_t count) const {
  if (first > rows_ || count > rows_ - first) {
    throw ParameterError("rows [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") exceed history of " + std::to_string(rows_) + " rows");
  }
  HistoryMatrix out(columns_, count);
  std::copy(cells_.begin() + static_cast<std::ptrdiff_t>(first * cols()),
            cells_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols()),
            out.cells_.begin());
  return out;
}

}  // namespace trafficbp
