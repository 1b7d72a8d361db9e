#include "coda/csv.hpp"
#include "coda/error.hpp"

#include "doctest.h"

#include <sstream>

using namespace coda;

namespace {

csv::Table parse(const std::string& text) {
  std::istringstream in(text);
  return csv::read(in);
}

}  // namespace

TEST_CASE("plain csv") {
  const csv::Table t = parse("a,b,c\n1,2,3\n4,5,6\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1] == std::vector<std::string>{"4", "5", "6"});
  CHECK(t.line_numbers == std::vector<std::size_t>{2, 3});
}

TEST_CASE("quotes, crlf, bom and blank lines") {
  const csv::Table t = parse("\xEF\xBB\xBFname,type\r\n\"Smith, J\",\"Sand & gravel\"\r\n\r\n\"say \"\"hi\"\"\",\"two\nlines\"\r\n5,\n");
  CHECK(t.header[0] == "name");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][0] == "Smith, J");
  CHECK(t.rows[0][1] == "Sand & gravel");
  CHECK(t.rows[1][0] == "say \"hi\"");
  CHECK(t.rows[1][1] == "two\nlines");
  CHECK(t.rows[2] == std::vector<std::string>{"5", ""});
  CHECK(t.line_numbers == std::vector<std::size_t>{2, 4, 6});
}

TEST_CASE("no trailing newline") {
  const csv::Table t = parse("x\n1\n2");
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][0] == "2");
}

TEST_CASE("malformed input") {
  auto code = [](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("a,b\n1,2,3\n") == ErrorCode::TypeParseError);
  CHECK(code("a,b\n\"1,2\n") == ErrorCode::TypeParseError);
  CHECK(code("") == ErrorCode::TypeParseError);
  CHECK_THROWS_AS(csv::read_file("/nonexistent/file.csv"), Error);
}

TEST_CASE("escape round trip") {
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("say \"x\"") == "\"say \"\"x\"\"\"");
  const csv::Table t = parse("h\n" + csv::escape("a,\"b\"\nc") + "\n");
  CHECK(t.rows[0][0] == "a,\"b\"\nc");
}
