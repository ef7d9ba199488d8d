#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace alienzoo {

/// RFC 4180 writer: CRLF-free ("\n") rows, quotes only when a cell needs it.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a header row plus data rows; every row must have the header's width.
CsvTable read_csv_table(std::istream& in);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace alienzoo
