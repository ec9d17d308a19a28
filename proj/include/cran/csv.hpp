#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace cran {

/// Empty, integer, real or text cell.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
std::string format_cell(const Cell& c);

/// In-memory table written as RFC 4180 CSV (CRLF line ends, quoted fields
/// where needed).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  int column(const std::string& name) const;  // -1 if absent
  bool has_column(const std::string& name) const { return column(name) >= 0; }
  void add_row(std::vector<Cell> row);
  /// Numeric value of a cell; NaN for empty cells. Throws on text that is
  /// not a number.
  double number(std::size_t row, const std::string& name) const;
  std::string text(std::size_t row, const std::string& name) const;
};

std::string to_csv(const Table& t);
void write_csv(const std::string& path, const Table& t);

/// Parses RFC 4180 text; every cell comes back as a string (empty fields as
/// empty cells). Throws InvalidArgument with a line number on malformed input.
Table parse_csv(const std::string& text);
Table read_csv(const std::string& path);

/// Groups rows by `keys` (first-appearance order) and reports n plus the mean
/// and sample standard deviation of each value column over non-empty cells.
Table aggregate(const Table& raw, const std::vector<std::string>& keys,
                const std::vector<std::string>& values);

}  // namespace cran
