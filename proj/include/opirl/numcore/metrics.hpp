#pragma once

#include <filesystem>
#include <ostream>
#include <map>
#include <string>
#include <vector>

namespace opirl {

/// Rectangular table of named numeric columns.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  MetricsTable() = default;
  explicit MetricsTable(std::vector<std::string> cols) : columns(std::move(cols)) {}

  /// Values must be given for every column.
  void add_row(const std::map<std::string, double>& values);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

/// Comma-separated with a header line; numbers in shortest round-trip form,
/// NaN written as "nan".
void write_csv(const std::filesystem::path& path, const MetricsTable& table);
void write_csv(std::ostream& out, const MetricsTable& table);
MetricsTable read_csv(const std::filesystem::path& path);

}  // namespace opirl
