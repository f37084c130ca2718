// Plot data as whitespace-separated columns plus standalone SVG line charts.

#pragma once

#include <string>
#include <vector>

namespace shwave::plot {

struct Series {
  std::string label;
  std::vector<double> x, y;  // non-finite points break the polyline
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string render_svg(const Figure& figure, int width = 720, int height = 440);

/// "# name1 name2 ...\n" followed by one row per index; all columns must have
/// equal length. Values use 17 significant digits; NaN prints as "nan".
std::string columnar(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns);

}  // namespace shwave::plot
