#pragma once

#include <string>
#include <vector>

namespace homdip {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool right_axis = false;  // scale against the secondary y axis
};

struct SvgPlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string y_right_label;  // empty when no secondary axis
  std::vector<SvgSeries> series;
  // optional clip of the x range (baseline wings are data, not display)
  bool clip_x = false;
  double x_min = 0.0;
  double x_max = 0.0;
};

// Minimal static line chart: axes, ticks, polylines, legend.
void write_svg_plot(const std::string& path, const SvgPlotSpec& spec);

}  // namespace homdip
