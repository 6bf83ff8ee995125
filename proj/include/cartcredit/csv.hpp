#pragma once

// Minimal CSV support: comma delimiter, first row is the header, fields may
// be double-quoted with "" as the escaped quote.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cartcredit::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;
};

// Throws Error{MissingFile} when the file cannot be opened and
// Error{MalformedDocument} on an unterminated quote.
Table read_file(const std::filesystem::path& path);
Table parse(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cartcredit::csv
