#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ladderkit {

/// Schema or syntax error in a CSV input; `line()` is 1-based (header = 1).
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Comma-separated table with a header row. Double-quoted fields may contain
/// commas and doubled quotes; embedded newlines are not supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  const std::string& text(std::size_t row, std::size_t col) const { return rows[row][col]; }
  double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace ladderkit
