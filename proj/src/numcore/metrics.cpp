#include "opirl/numcore/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

void MetricsTable::add_row(const std::map<std::string, double>& values) {
  if (values.size() != columns.size()) {
    throw ContractError("metrics row has " + std::to_string(values.size()) + " values for " +
                        std::to_string(columns.size()) + " columns");
  }
  std::vector<double> row;
  row.reserve(columns.size());
  for (const auto& c : columns) {
    auto it = values.find(c);
    if (it == values.end()) throw ContractError("metrics row is missing column '" + c + "'");
    row.push_back(it->second);
  }
  rows.push_back(std::move(row));
}

std::size_t MetricsTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  std::string known;
  for (const auto& c : columns) known += (known.empty() ? "" : ", ") + c;
  throw SchemaError("no column '" + name + "' (have: " + known + ")");
}

std::vector<double> MetricsTable::column(const std::string& name) const {
  const std::size_t i = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

void write_csv(std::ostream& out, const MetricsTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << (std::isnan(row[i]) ? std::string("nan") : format_double(row[i]));
    }
    out << "\n";
  }
}

void write_csv(const std::filesystem::path& path, const MetricsTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

MetricsTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  MetricsTable table;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV file");
  ++lineno;
  table.columns = split(line);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.columns.size()) {
      throw ParseError(lineno, "expected " + std::to_string(table.columns.size()) + " cells, found " +
                                   std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      row.push_back(c == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(c, lineno));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace opirl
