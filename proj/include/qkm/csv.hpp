#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qkm::csv {

/// Shortest text that round-trips exactly.
std::string format_double(double value);
/// Parses a full token as a double; throws ConfigError on trailing garbage.
double parse_double(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');

struct Table {
  /// "# key=value" lines preceding the header, in file order.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws ConfigError if absent.
  std::size_t column(std::string_view name) const;
  std::string meta(std::string_view key) const;
};

Table read_table(const std::string& path);
void write_table(std::ostream& os, const Table& table);

}  // namespace qkm::csv
