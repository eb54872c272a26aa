#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbdt/common.hpp"

namespace cbdt {

// Minimal CSV table: header row + numeric cells. Missing cells parse to NaN.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // rows[i][j]

  int col_index(const std::string& name) const;  // -1 when absent
  int require_col(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Values written with round-trip precision so read_csv(write_csv(t)) == t.
void write_csv(const std::string& path, const CsvTable& table);

std::string format_double(double x);  // shortest round-trip representation

}  // namespace cbdt
