#pragma once

// Minimal CSV plumbing shared by the ingestion and report writers.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "intona/errors.hpp"

namespace intona {

// Fixed, locale-independent number formatting so repeated runs emit
// byte-identical files.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // trimmed fields
  std::vector<size_t> row_numbers;             // 1-based line numbers
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open file: " + path);
  }
  CsvTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    auto fields = split_csv_line(t);
    if (table.header.empty()) {
      table.header = fields;
    } else {
      table.rows.push_back(fields);
      table.row_numbers.push_back(line_no);
    }
  }
  if (table.header.empty()) {
    throw input_error("empty file: " + path);
  }
  return table;
}

inline double parse_double(const std::string& s, const std::string& path,
                           size_t line_no, const std::string& field) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw input_error(path + ": line " + std::to_string(line_no) +
                      ": bad value for " + field + ": '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const std::string& path,
                       size_t line_no, const std::string& field) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw input_error(path + ": line " + std::to_string(line_no) +
                      ": bad value for " + field + ": '" + s + "'");
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw input_error("cannot write file: " + path);
  }
  return out;
}

}  // namespace intona
