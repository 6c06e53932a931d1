#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qres/errors.hpp"
#include "qres/io.hpp"

using namespace qres;

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("csv parsing") {
  const auto rows = parse_csv("a,b,c\r\n1,\"x,y\",\"q\"\"q\"\n\"multi\nline\",,3\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"1", "x,y", "q\"q"});
  CHECK(rows[2] == std::vector<std::string>{"multi\nline", "", "3"});
  CHECK(parse_csv("x\ny").size() == 2);
  CHECK_THROWS_AS(parse_csv("\"open"), ValidationError);
}

TEST_CASE("csv writer round trip") {
  const auto path = std::filesystem::temp_directory_path() / "qres_test_io.csv";
  {
    CsvWriter w(path);
    w.row({"name", "value"});
    w.row(std::vector<std::string>{"a,b", "\"1\""});
  }
  const auto rows = read_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1] == std::vector<std::string>{"a,b", "\"1\""});
  std::filesystem::remove(path);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(config_hash(nlohmann::json{{"b", 1}, {"a", 2}}) == config_hash(nlohmann::json{{"a", 2}, {"b", 1}}));
  CHECK(config_hash(nlohmann::json{{"a", 1}}) != config_hash(nlohmann::json{{"a", 2}}));
}

TEST_CASE("json files") {
  const auto path = std::filesystem::temp_directory_path() / "qres_test_io.json";
  write_json(path, nlohmann::json{{"k", {1, 2, 3}}});
  CHECK(read_json(path).at("k").size() == 3);
  {
    std::ofstream out(path);
    out << "{ broken";
  }
  CHECK_THROWS_AS(read_json(path), ValidationError);
  std::filesystem::remove(path);
  CHECK_THROWS(read_json(path));
}
