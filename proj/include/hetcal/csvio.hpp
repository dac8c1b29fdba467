#pragma once

#include <string>
#include <vector>

namespace hetcal {

// Minimal numeric CSV support: one header row naming the columns, comma
// separated, every body cell a finite number.  Parse failures carry the
// 1-based line number and the offending column name.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;    // -1 when absent
  int require_column(const std::string& name) const;  // throws DataError
};

CsvTable read_csv(const std::string& path);
CsvTable read_csv_text(const std::string& text, const std::string& origin);
void write_csv(const CsvTable& table, const std::string& path);

}  // namespace hetcal
