#pragma once

// RFC 4180 reading and writing. Accepts LF or CRLF record separators and a
// leading UTF-8 byte order mark.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  // 1-based physical line on which each row starts (header is line 1).
  std::vector<std::size_t> lines;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string quote_if_needed(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace fairaudit::csv
