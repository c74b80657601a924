#include "fairaudit/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "fairaudit/error.hpp"

namespace fairaudit::csv {

Table parse(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> records;
  std::vector<std::size_t> lines;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    // A lone unquoted empty field is a blank line, not a record.
    const bool blank = row.empty() && field.empty() && !field_was_quoted;
    end_field();
    if (!blank) {
      records.push_back(std::move(row));
      lines.push_back(row_line);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw DataError("csv line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        if (field_was_quoted) {
          throw DataError("csv line " + std::to_string(line) + ": text after closing quote");
        }
        field += c;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field starting on line " + std::to_string(row_line));
  if (!field.empty() || field_was_quoted || !row.empty()) end_row();

  Table table;
  if (records.empty()) throw DataError("csv: no header row");
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  table.lines.assign(lines.begin() + 1, lines.end());
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  if (row.size() == 1 && row[0].empty()) {
    out << "\"\"\n";
    return;
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << quote_if_needed(row[i]);
  }
  out << '\n';
}

}  // namespace fairaudit::csv
