#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "portsel/errors.hpp"
#include "portsel/table.hpp"

namespace portsel {

namespace detail {

// One CSV record: comma separated, optional double-quoting with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

inline table read_csv(std::istream& in) {
  table t;
  std::string line;
  if (!std::getline(in, line)) throw schema_error("empty CSV input");
  t.columns = detail::split_csv_line(detail::strip_cr(line));
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    t.rows.push_back(detail::split_csv_line(line));
  }
  t.check_rectangular();
  return t;
}

inline table read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file: " + path.string());
  try {
    return read_csv(in);
  } catch (const error& e) {
    throw schema_error(path.string() + ": " + e.what());
  }
}

inline void write_csv(std::ostream& out, const table& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    out << (j ? "," : "") << t.columns[j];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
}

}  // namespace portsel
