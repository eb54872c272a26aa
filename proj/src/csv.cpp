#include "cbdt/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cbdt {

int CsvTable::col_index(const std::string& name) const {
  for (size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return int(j);
  return -1;
}

int CsvTable::require_col(const std::string& name) const {
  const int j = col_index(name);
  if (j < 0) throw IoError("missing required column '" + name + "'");
  return j;
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path);
  t.columns = split_line(line);
  const size_t ncol = t.columns.size();
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != ncol)
      throw IoError(path + ": line " + std::to_string(lineno) + " has " +
                    std::to_string(cells.size()) + " cells, expected " + std::to_string(ncol));
    std::vector<double> row(ncol);
    for (size_t j = 0; j < ncol; ++j) {
      const std::string& s = cells[j];
      if (s.empty() || s == "NA" || s == "nan" || s == "NaN") {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      char* end = nullptr;
      row[j] = std::strtod(s.c_str(), &end);
      if (end == s.c_str())
        throw IoError(path + ": line " + std::to_string(lineno) + ", column '" + t.columns[j] +
                      "': not a number: '" + s + "'");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  // %.17g always round-trips; prefer the shorter %.15g / %.16g when they do.
  char buf[40];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  for (size_t j = 0; j < table.columns.size(); ++j)
    out << table.columns[j] << (j + 1 < table.columns.size() ? "," : "\n");
  for (const auto& row : table.rows) {
    for (size_t j = 0; j < row.size(); ++j)
      out << format_double(row[j]) << (j + 1 < row.size() ? "," : "\n");
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace cbdt
