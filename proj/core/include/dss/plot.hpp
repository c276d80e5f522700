#pragma once

#include <string>
#include <vector>

namespace dss {

struct PlotSeries {
  std::string label;
  std::string color;  // SVG color
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal SVG line chart: axes, tick labels, legend. Pure rendering of the
/// data handed in; emits a deterministic byte stream for identical inputs.
void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series);

}  // namespace dss
