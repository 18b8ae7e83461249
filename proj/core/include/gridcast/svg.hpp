#pragma once

#include <string>
#include <vector>

namespace gridcast {

// One polyline of a plot. NaN values break the line (gaps stay visible).
struct SvgSeries {
  std::string label;
  std::string color;  // any SVG color string
  std::vector<double> values;
};

// Minimal static line plot: axes, y ticks, legend, one polyline per series,
// x is the sample index. Deterministic output for identical inputs.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series, const std::string& x_label = "step",
                    const std::string& y_label = "kW");

}  // namespace gridcast
