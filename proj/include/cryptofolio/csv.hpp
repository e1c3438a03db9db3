#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cryptofolio::csv {

/// One parsed data row plus its 1-based line number in the source file.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Reads a comma-delimited file with a header row. Blank lines are skipped,
/// surrounding whitespace and a trailing '\r' are trimmed from every cell.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Parses a decimal number, rejecting trailing garbage.
double parse_double(std::string_view text);

/// Shortest round-trip representation ("%.17g").
std::string format_exact(double value);

}  // namespace cryptofolio::csv
