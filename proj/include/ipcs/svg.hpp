#pragma once

// Minimal deterministic SVG line charts: fixed canvas, fixed palette, no
// timestamps or random ids, so the same data always renders byte-identical
// output. Supports a logarithmic x axis, a secondary y axis, dashed series,
// and horizontal guide lines.

#include <string>
#include <utility>
#include <vector>

namespace ipcs {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), in data units
  bool dashed = false;
  int axis = 0;  // 0: left y axis, 1: right y axis
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string y2_label;  // right axis; used only if some series has axis = 1
  bool log_x = false;
  std::vector<SvgSeries> series;
  std::vector<double> h_guides;  // dashed horizontal lines on the left axis
};

// Throws std::invalid_argument when there is nothing to draw or a log-x
// chart receives a non-positive x value.
std::string render_line_chart(const SvgChart& chart);

}  // namespace ipcs
