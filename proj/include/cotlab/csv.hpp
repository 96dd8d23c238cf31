#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cotlab {

using CsvValue = std::variant<std::int64_t, double, std::string, bool>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvValue>> rows;
};

// 17 significant digits: parses back to the identical double ("inf"/"nan"
// spelled out by the C library).
std::string format_double(double value);

// RFC-4180-style rendering: header row first, comma separated, CRLF-free
// ('\n' line ends), fields quoted only when they contain a comma, quote, or
// newline. Booleans render as true/false.
std::string to_csv(const CsvTable& table);

void write_csv(const CsvTable& table, const std::string& path);

// Parses a CSV produced by to_csv (no embedded newlines in fields).
CsvTable parse_csv(const std::string& text);

}  // namespace cotlab
