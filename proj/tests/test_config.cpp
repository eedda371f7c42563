#include <sstream>

#include "doctest.h"
#include "spanlab/config.hpp"

using namespace spanlab;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}

}  // namespace

TEST_CASE("key value parsing") {
  KeyValueConfig kv = parse("# comment\n\n k = 20 \nname=hello world\nflag = true\nrate = 0.5\nseeds = 1, 2,3\n");
  CHECK(kv.get_int("k", 0) == 20);
  CHECK(kv.get_string("name", "") == "hello world");
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_double("rate", 0.0) == 0.5);
  CHECK(kv.get_list("seeds", {}) == std::vector<std::string>{"1", "2", "3"});
  CHECK(kv.get_uint("missing", 7) == 7);
  CHECK_NOTHROW(kv.finish());
}

TEST_CASE("unknown keys are reported") {
  KeyValueConfig kv = parse("k = 1\ntypo = 2\n");
  kv.get_int("k", 0);
  CHECK_THROWS_WITH_AS(kv.finish(), doctest::Contains("typo"), ConfigError);
}

TEST_CASE("malformed configuration") {
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
  KeyValueConfig kv = parse("k = twenty\nx = 1.5e\nb = maybe\nu = -3\n");
  CHECK_THROWS_AS(kv.get_int("k", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_double("x", 0.0), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("b", false), ConfigError);
  CHECK_THROWS_AS(kv.get_uint("u", 0), ConfigError);
}

TEST_CASE("typed lists") {
  CHECK(parse_double_list({"0.01", "0.5"}, "lr") == std::vector<double>{0.01, 0.5});
  CHECK(parse_int_list({"1", "8"}, "batch") == std::vector<long>{1, 8});
  CHECK_THROWS_AS(parse_int_list({"1", "x"}, "batch"), ConfigError);
}
