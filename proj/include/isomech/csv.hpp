#pragma once

// Minimal CSV I/O: header row, comma separated, no quoting, '.' decimal.
// Read errors carry "<source>:<line>:" prefixes.

#include <iosfwd>
#include <string>
#include <vector>

namespace isomech::csv {

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;  // 1-based file line of each row

  /// Column position by name; throws ValidationError naming the file.
  int column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  double number(std::size_t row, int col) const;
  long long integer(std::size_t row, int col) const;
  const std::string& cell(std::size_t row, int col) const { return rows[row][static_cast<std::size_t>(col)]; }
  /// "<source>:<line>: " for row-level messages.
  std::string where(std::size_t row) const;
};

Table parse(std::istream& in, const std::string& source);
Table read_file(const std::string& path);

/// Locale-independent parsing of a whole token.
double parse_double(const std::string& token);
long long parse_integer(const std::string& token);

std::vector<std::string> split(const std::string& s, char sep);

/// 12 significant digits.
std::string format_number(double v);

void write(std::ostream& out, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

}  // namespace isomech::csv
