#include "hetcal/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hetcal/common.hpp"

namespace hetcal {

namespace {

std::vector<std::string> split_line(const std::string& line) {
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
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int i = column_index(name);
  if (i < 0) {
    std::string have;
    for (const auto& c : columns) have += (have.empty() ? "" : ", ") + c;
    throw DataError("missing column '" + name + "' (available: " + have + ")");
  }
  return i;
}

CsvTable read_csv_text(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto cells = split_line(line);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns.size())
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.columns.size()) + " cells, found " +
                      std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size() ||
          !std::isfinite(v))
        throw DataError(origin + ":" + std::to_string(lineno) +
                        ": column '" + t.columns[i] +
                        "': cannot parse '" + c + "' as a finite number");
      row[i] = v;
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw DataError(origin + ": no header row");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_csv_text(ss.str(), path);
}

void write_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw DataError("write_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace hetcal
