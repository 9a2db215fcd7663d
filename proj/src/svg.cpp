#include "ipcs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ipcs {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 74.0;
constexpr double kRight = kWidth - 74.0;
constexpr double kTop = 52.0;
constexpr double kBottom = kHeight - 64.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  bool used = false;

  void widen(double v) {
    if (!used) {
      lo = hi = v;
      used = true;
      return;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi == lo) {
      const double bump = hi == 0.0 ? 1.0 : std::abs(hi) * 0.5;
      lo -= bump;
      hi += bump;
      return;
    }
    const double margin = (hi - lo) * 0.05;
    lo -= margin;
    hi += margin;
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0, double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Ticks at 1-2-5 multiples of a power of ten, about `target` of them.
std::vector<double> linear_ticks(const Range& r, int target) {
  const double span = r.hi - r.lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

// Decade ticks for a log10-transformed range.
std::vector<double> decade_ticks(const Range& r) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::ceil(r.lo - 1e-9));
       e <= static_cast<int>(std::floor(r.hi + 1e-9)); ++e) {
    ticks.push_back(e);
  }
  return ticks;
}

std::string escape_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const SvgChart& chart) {
  Range xr, yr[2];
  bool any_point = false;
  for (const auto& s : chart.series) {
    if (s.axis != 0 && s.axis != 1) {
      throw std::invalid_argument("chart: series axis must be 0 or 1");
    }
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("chart: non-finite data point");
      }
      if (chart.log_x && !(x > 0.0)) {
        throw std::invalid_argument("chart: log axis needs positive x");
      }
      xr.widen(chart.log_x ? std::log10(x) : x);
      yr[s.axis].widen(y);
      any_point = true;
    }
  }
  if (!any_point) {
    throw std::invalid_argument("chart: no data points to draw");
  }
  for (double g : chart.h_guides) yr[0].widen(g);
  xr.pad();
  if (yr[0].used) yr[0].pad();
  if (yr[1].used) yr[1].pad();

  auto px = [&](double u) {
    return kLeft + xr.frac(u) * (kRight - kLeft);
  };
  auto py = [&](double v, int axis) {
    return kBottom - yr[axis].frac(v) * (kBottom - kTop);
  };

  std::string svg = fmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
      "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">\n";

  // Gridlines and tick labels.
  const std::vector<double> xticks =
      chart.log_x ? decade_ticks(xr) : linear_ticks(xr, 8);
  for (double t : xticks) {
    const double x = px(t);
    svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
               "stroke=\"#e0e0e0\"/>\n",
               x, kTop, x, kBottom);
    const double value = chart.log_x ? std::pow(10.0, t) : t;
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", x,
               kBottom + 18.0);
    svg += num(value);
    svg += "</text>\n";
  }
  if (yr[0].used) {
    for (double t : linear_ticks(yr[0], 6)) {
      const double y = py(t, 0);
      svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                 "stroke=\"#e0e0e0\"/>\n",
                 kLeft, y, kRight, y);
      svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">",
                 kLeft - 8.0, y + 4.0);
      svg += num(t);
      svg += "</text>\n";
    }
  }
  if (yr[1].used) {
    for (double t : linear_ticks(yr[1], 6)) {
      const double y = py(t, 1);
      svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"start\">",
                 kRight + 8.0, y + 4.0);
      svg += num(t);
      svg += "</text>\n";
    }
  }

  for (double g : chart.h_guides) {
    const double y = py(g, 0);
    svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
               "stroke=\"#888888\" stroke-dasharray=\"4,4\"/>\n",
               kLeft, y, kRight, y);
  }

  svg += fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
             "fill=\"none\" stroke=\"#333333\"/>\n",
             kLeft, kTop, kRight - kLeft, kBottom - kTop);

  // Series polylines with point markers on sparse data.
  int color_idx = 0;
  for (const auto& s : chart.series) {
    if (s.points.empty()) continue;
    const char* color = kPalette[color_idx % kPaletteSize];
    ++color_idx;
    std::string pts;
    for (const auto& [x, y] : s.points) {
      pts += fmt("%.2f,%.2f ", px(chart.log_x ? std::log10(x) : x),
                 py(y, s.axis));
    }
    if (!pts.empty()) pts.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\"";
    if (s.dashed) svg += " stroke-dasharray=\"7,5\"";
    svg += " points=\"" + pts + "\"/>\n";
    if (s.points.size() <= 64) {
      for (const auto& [x, y] : s.points) {
        svg += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"",
                   px(chart.log_x ? std::log10(x) : x), py(y, s.axis));
        svg += color;
        svg += "\"/>\n";
      }
    }
  }

  // Legend, top-left inside the plot.
  double ly = kTop + 18.0;
  color_idx = 0;
  for (const auto& s : chart.series) {
    if (s.points.empty()) continue;
    const char* color = kPalette[color_idx % kPaletteSize];
    ++color_idx;
    svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
               "stroke-width=\"2\" stroke=\"",
               kLeft + 12.0, ly - 4.0, kLeft + 40.0, ly - 4.0);
    svg += color;
    svg += "\"";
    if (s.dashed) svg += " stroke-dasharray=\"7,5\"";
    svg += "/>\n";
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\">", kLeft + 46.0, ly);
    svg += escape_text(s.label);
    svg += "</text>\n";
    ly += 18.0;
  }

  // Title and axis labels.
  svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
             "font-size=\"16\">",
             (kLeft + kRight) / 2.0, 26.0);
  svg += escape_text(chart.title);
  svg += "</text>\n";
  svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
             "font-size=\"13\">",
             (kLeft + kRight) / 2.0, kHeight - 16.0);
  svg += escape_text(chart.x_label);
  svg += "</text>\n";
  svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
             "font-size=\"13\" transform=\"rotate(-90 %.2f %.2f)\">",
             20.0, (kTop + kBottom) / 2.0, 20.0, (kTop + kBottom) / 2.0);
  svg += escape_text(chart.y_label);
  svg += "</text>\n";
  if (yr[1].used && !chart.y2_label.empty()) {
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
               "font-size=\"13\" transform=\"rotate(90 %.2f %.2f)\">",
               kWidth - 18.0, (kTop + kBottom) / 2.0, kWidth - 18.0,
               (kTop + kBottom) / 2.0);
    svg += escape_text(chart.y2_label);
    svg += "</text>\n";
  }

  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace ipcs
