#pragma once

// Minimal comma-separated reader for the numeric tables this library
// ingests. No quoting: ids and numbers never contain commas.

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace netdid::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based file line of each row
};

std::vector<std::string> split_line(std::string_view line);

// Returns false when the file cannot be opened. Blank lines are skipped.
bool read_table(const std::string& path, Table& out);

// Strict parse of the whole cell; returns false on empty, trailing junk or
// out-of-range values.
bool parse_double(std::string_view cell, double& out);
bool parse_int(std::string_view cell, long long& out);

std::string format_double(double v);

}  // namespace netdid::csv
