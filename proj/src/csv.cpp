#include "convbench/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "convbench/error.hpp"

namespace convbench::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(begin));
      break;
    }
    cells.emplace_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return cells;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  Table table;
  std::string line;
  bool have_header = false;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      // Tolerate a UTF-8 byte order mark.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      table.header = split(line);
      have_header = true;
      continue;
    }
    ++data_row;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ParseError(data_row, "expected " +
                                     std::to_string(table.header.size()) +
                                     " cells, found " +
                                     std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  if (!have_header) throw SchemaError("'" + path.string() + "' has no header");
  return table;
}

void write(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::map<std::string, std::size_t> index_columns(
    const std::vector<std::string>& header,
    const std::vector<std::string>& required) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
  std::string missing;
  for (const auto& name : required) {
    if (!index.contains(name)) {
      if (!missing.empty()) missing += ", ";
      missing += name;
    }
  }
  if (!missing.empty()) throw SchemaError("missing columns: " + missing);
  return index;
}

std::optional<std::int64_t> parse_int(std::string_view cell) {
  std::int64_t v = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view cell) {
  double v = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace convbench::csv
