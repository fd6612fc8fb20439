#pragma once

// Minimal CSV plumbing for the two numeric file formats this project owns.
// Neither format needs quoting: every cell is an integer, a decimal number, an
// enum word, or a convolution key, none of which contain commas.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace convbench::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(std::string_view line);

// Reads a whole file. Blank lines are skipped, a trailing '\r' is stripped,
// and every row must have the header's cell count (ParseError otherwise).
// Throws IoError when the file cannot be opened and SchemaError when it is
// empty.
Table read(const std::filesystem::path& path);

// Truncates then writes. Throws IoError on failure.
void write(const std::filesystem::path& path, const std::string& content);

// Maps column name -> index. Throws SchemaError listing every `required`
// column absent from `header`.
std::map<std::string, std::size_t> index_columns(
    const std::vector<std::string>& header,
    const std::vector<std::string>& required);

// Strict decimal parsers: the whole cell must be consumed. Return nullopt on
// failure so callers can attach a row number.
std::optional<std::int64_t> parse_int(std::string_view cell);
std::optional<double> parse_double(std::string_view cell);

// Shortest representation that parses back to the same double, so numeric
// cells survive write -> read -> write byte-for-byte.
std::string format_double(double v);

}  // namespace convbench::csv
