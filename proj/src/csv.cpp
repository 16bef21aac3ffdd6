#include "mfwidth/csv.hpp"

#include <string_view>

#include "mfwidth/error.hpp"

namespace mfwidth {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<CsvRow> read_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    CsvRow row;
    row.line = line_no;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    const std::size_t start_line = line_no;
    for (std::size_t i = 0;; ++i) {
      if (i == line.size()) {
        if (!quoted) break;
        // Quoted field spanning lines.
        std::string next;
        if (!std::getline(in, next)) {
          throw Error(ErrorKind::InvalidInput,
                      "line " + std::to_string(start_line) + ": unterminated quoted field");
        }
        ++line_no;
        if (!next.empty() && next.back() == '\r') next.pop_back();
        field += '\n';
        line = next;
        i = static_cast<std::size_t>(-1);
        continue;
      }
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && trim(field).empty()) {
        field.clear();
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        row.fields.push_back(was_quoted ? field : trim(field));
        field.clear();
        was_quoted = false;
      } else {
        field += c;
      }
    }
    row.fields.push_back(was_quoted ? field : trim(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mfwidth
