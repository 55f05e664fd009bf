#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace relprobe::csv {

// RFC 4180 style quoting, applied only when the field needs it.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits one CSV record. Quoted fields may not span lines.
std::vector<std::string> split_row(std::string_view line);

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Reads a header-led CSV file into rows of fields; blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws InputError when absent.
  std::size_t column(std::string_view name) const;
};

Table read_table(const std::string& path);
Table read_table(std::istream& in, const std::string& source);

}  // namespace relprobe::csv
