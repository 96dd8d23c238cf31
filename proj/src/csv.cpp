#include "cotlab/csv.hpp"

#include <cstdio>

#include "cotlab/errors.hpp"
#include "cotlab/model_io.hpp"

namespace cotlab {

namespace {

std::string escape_field(const std::string& field) {
  bool needs_quotes = false;
  for (char ch : field) {
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string render_value(const CsvValue& value) {
  switch (value.index()) {
    case 0:
      return std::to_string(std::get<std::int64_t>(value));
    case 1:
      return format_double(std::get<double>(value));
    case 2:
      return escape_field(std::get<std::string>(value));
    default:
      return std::get<bool>(value) ? "true" : "false";
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out += ',';
    out += escape_field(table.header[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error("CSV row has " + std::to_string(row.size()) +
                  " fields, header has " + std::to_string(table.header.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += render_value(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
  write_file(path, to_csv(table));
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      field.clear();
      lines.push_back(std::move(fields));
      fields.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (!field.empty() || !fields.empty()) {
    fields.push_back(std::move(field));
    lines.push_back(std::move(fields));
  }
  if (lines.empty()) throw Error("CSV: empty document");
  table.header = lines[0];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<CsvValue> row;
    row.reserve(lines[i].size());
    for (auto& f : lines[i]) row.push_back(CsvValue(std::move(f)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace cotlab
