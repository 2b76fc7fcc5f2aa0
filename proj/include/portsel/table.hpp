#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "portsel/errors.hpp"

namespace portsel {

// Rectangular table of raw text cells: a header and rows. The thin layer
// between file parsing and dataset construction; cells are validated and
// converted when a dataset is built, never silently coerced before.
struct table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<int>(j);
    return -1;
  }

  void check_rectangular() const {
    for (const auto& r : rows)
      if (r.size() != columns.size())
        throw schema_error("table row has " + std::to_string(r.size()) +
                           " cells, expected " + std::to_string(columns.size()));
    for (std::size_t a = 0; a < columns.size(); ++a)
      for (std::size_t b = a + 1; b < columns.size(); ++b)
        if (columns[a] == columns[b])
          throw schema_error("duplicate column name '" + columns[a] + "'");
  }
};

// Strict parse: the full cell must be a finite number.
inline double parse_numeric_cell(const std::string& s, const std::string& context) {
  if (s.empty())
    throw validation_error("missing value in " + context);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw validation_error("non-numeric or non-finite value '" + s + "' in " + context);
  return v;
}

// Accepts T/F and true/false, case-insensitively.
inline bool parse_bool_cell(const std::string& s, const std::string& context) {
  std::string lower;
  lower.reserve(s.size());
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "t" || lower == "true") return true;
  if (lower == "f" || lower == "false") return false;
  throw validation_error("expected a boolean (T/F or true/false), got '" + s + "' in " + context);
}

}  // namespace portsel
