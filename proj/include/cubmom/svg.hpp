#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cubmom::cli {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Static line chart; exactly one polyline element per series. Log-scale y
/// drops nonpositive values.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series, bool log_y);

}  // namespace cubmom::cli
