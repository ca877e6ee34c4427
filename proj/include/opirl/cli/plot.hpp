#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace opirl {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Self-contained SVG with axes, tick labels, a legend and one polyline per
/// series. Non-finite points are skipped. Output depends only on the input.
std::string render_svg(const LineChart& chart);

/// One series per CSV file, `column` against the "step" column, labelled by file stem.
LineChart chart_from_csv(const std::vector<std::filesystem::path>& csv_files, const std::string& column);

}  // namespace opirl
