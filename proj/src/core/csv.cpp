#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"

namespace qkm::csv {

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ContractViolation("format_double: buffer too small");
  return std::string(buf, end);
}

double parse_double(std::string_view token) {
  const std::string s(token);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("missing column '" + std::string(name) + "'");
}

std::string Table::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  throw ConfigError("missing metadata key '" + std::string(key) + "'");
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Table table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) table.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      table.header = split(line);
      have_header = true;
      continue;
    }
    auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw ConfigError(path + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ConfigError(path + ": no header line");
  return table;
}

void write_table(std::ostream& os, const Table& table) {
  for (const auto& [k, v] : table.metadata) os << "# " << k << '=' << v << '\n';
  os << join(table.header) << '\n';
  for (const auto& row : table.rows) os << join(row) << '\n';
}

}  // namespace qkm::csv
