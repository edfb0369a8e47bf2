#include "isomech/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "isomech/error.hpp"

namespace isomech::csv {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& token) {
  const std::string t = trim(token);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* begin = t.data() + (!t.empty() && t[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("not a number: \"" + t + "\"");
  }
  return v;
}

long long parse_integer(const std::string& token) {
  const std::string t = trim(token);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("not an integer: \"" + t + "\"");
  }
  return v;
}

Table parse(std::istream& in, const std::string& source) {
  Table t;
  t.source = source;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ValidationError(fmt::format("{}:{}: expected {} fields, found {}", source, lineno,
                                        t.header.size(), fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw ValidationError(source + ": empty file (missing header row)");
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  return parse(in, path);
}

bool Table::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw ValidationError(source + ":1: missing column \"" + name + "\"");
}

std::string Table::where(std::size_t row) const { return fmt::format("{}:{}: ", source, lines[row]); }

double Table::number(std::size_t row, int col) const {
  try {
    return parse_double(cell(row, col));
  } catch (const ValidationError& e) {
    throw ValidationError(where(row) + header[static_cast<std::size_t>(col)] + ": " + e.what());
  }
}

long long Table::integer(std::size_t row, int col) const {
  try {
    return parse_integer(cell(row, col));
  } catch (const ValidationError& e) {
    throw ValidationError(where(row) + header[static_cast<std::size_t>(col)] + ": " + e.what());
  }
}

std::string format_number(double v) { return fmt::format("{:.12g}", v); }

void write(std::ostream& out, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

}  // namespace isomech::csv
