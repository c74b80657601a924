#include <doctest.h>

#include <sstream>

#include "fairaudit/config.hpp"
#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"

using namespace fairaudit;

TEST_CASE("config parsing trims, strips comments and rejects duplicates") {
  const auto cfg = KeyValueConfig::parse("# header\n a = 1 \nb=two words  # note\nlang = C#\n\n");
  CHECK(cfg.require("a") == "1");
  CHECK(cfg.require("b") == "two words");
  CHECK(cfg.require("lang") == "C#");
  CHECK(cfg.require_int("a") == 1);
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.require("missing"), ConfigError);
  CHECK_THROWS_AS(cfg.require_int("b"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse(" = 3"), ConfigError);
}

TEST_CASE("config suffixes and text round trip") {
  const auto cfg = KeyValueConfig::parse("x.b = 2\nx.a = 1\ny = 3\n");
  CHECK(cfg.suffixes("x.") == std::vector<std::string>{"a", "b"});
  const auto again = KeyValueConfig::parse(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double(" 1.5 ") == 1.5);
  CHECK(parse_double("+2") == 2.0);
  CHECK_FALSE(parse_double("1.5x"));
  CHECK_FALSE(parse_double(""));
  CHECK(parse_integer("-3") == -3);
  CHECK_FALSE(parse_integer("3.0"));
  CHECK(split_list(" a, b ,c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_list("  ").empty());
}

TEST_CASE("csv handles quoting, CRLF, BOM and blank lines") {
  const auto t = csv::parse("\xEF\xBB\xBFh1,h2\r\n\"a,1\",\"say \"\"hi\"\"\"\r\n\r\nx,\"multi\nline\"\ny,\n");
  REQUIRE(t.header == csv::Row{"h1", "h2"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0] == csv::Row{"a,1", "say \"hi\""});
  CHECK(t.rows[1] == csv::Row{"x", "multi\nline"});
  CHECK(t.rows[2] == csv::Row{"y", ""});
  CHECK(t.lines == std::vector<std::size_t>{2, 4, 6});
}

TEST_CASE("csv rejects malformed quoting") {
  CHECK_THROWS_AS(csv::parse("a\nx\"y\n"), DataError);
  CHECK_THROWS_AS(csv::parse("a\n\"open\n"), DataError);
  CHECK_THROWS_AS(csv::parse("a\n\"x\"y\n"), DataError);
  CHECK_THROWS_AS(csv::parse(""), DataError);
}

TEST_CASE("csv write then parse is the identity") {
  const std::vector<csv::Row> rows = {{"plain", "with,comma", "q\"uote", "new\nline", ""}, {""}};
  std::ostringstream out;
  csv::write_row(out, {"c1", "c2", "c3", "c4", "c5"});
  for (const auto& r : rows) csv::write_row(out, r);
  const auto t = csv::parse(out.str());
  CHECK(t.rows == rows);
}
