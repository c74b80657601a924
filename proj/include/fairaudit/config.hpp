#pragma once

// Flat key-value configuration files.
//
//   # comment
//   key = value          # trailing comment (needs whitespace before '#')
//   covariate.age = age
//
// Keys are unique; whitespace around keys and values is trimmed. Values are
// plain text, interpretation is up to the caller.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  double require_double(std::string_view key) const;
  int get_int(std::string_view key, int fallback) const;
  int require_int(std::string_view key) const;

  // Keys starting with `prefix`, with the prefix removed, in sorted order.
  std::vector<std::string> suffixes(std::string_view prefix) const;

  void set(std::string key, std::string value);
  const std::string& source() const { return source_; }
  std::string to_text() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::string source_ = "<string>";
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view text, char sep = ',');

// Strict numeric parsing: the whole (trimmed) string must be consumed.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

}  // namespace fairaudit
