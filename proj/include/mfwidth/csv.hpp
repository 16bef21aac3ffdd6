#pragma once

#include <istream>
#include <string>
#include <vector>

namespace mfwidth {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF. Blank lines
// are skipped. Fields are returned untrimmed except for surrounding spaces on
// unquoted fields.
std::vector<CsvRow> read_csv(std::istream& in);

}  // namespace mfwidth
