#pragma once

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF, optional UTF-8 BOM.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace coda::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row
};

/// Throws TypeParseError on ragged rows or an unterminated quote.
Table read(std::istream& in);
/// Throws IoError when the file cannot be opened.
Table read_file(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace coda::csv
