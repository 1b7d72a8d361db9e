#include "coda/csv.hpp"

#include "coda/error.hpp"

#include <fstream>
#include <istream>

namespace coda::csv {
namespace {

// Splits the next record; returns false at end of input. `line` tracks physical lines.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  const std::size_t start = line;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::TypeParseError, "unterminated quoted field starting on line " + std::to_string(start));
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  ++line;
  return true;
}

}  // namespace

Table read(std::istream& in) {
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
    if (!(bom[0] == '\xEF' && bom[1] == '\xBB' && bom[2] == '\xBF')) {
      throw Error(ErrorCode::TypeParseError, "malformed byte-order mark");
    }
  }
  Table t;
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!next_record(in, fields, line)) throw Error(ErrorCode::TypeParseError, "empty file: no header row");
  t.header = fields;
  for (;;) {
    const std::size_t record_line = line;
    if (!next_record(in, fields, line)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::TypeParseError, "line " + std::to_string(record_line) + ": expected " +
                                                 std::to_string(t.header.size()) + " fields, found " +
                                                 std::to_string(fields.size()));
    }
    t.rows.push_back(fields);
    t.line_numbers.push_back(record_line);
  }
  return t;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read(in);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace coda::csv
