#pragma once

// Minimal self-contained SVG line charts for sweep outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "mechlab/analysis.hpp"

namespace mechlab {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

namespace detail {

inline std::string svg_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string svg_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series, int width = 640,
                                  int height = 420) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool any = false;
  for (const SvgSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x_min = x_max = x;
        y_min = y_max = y;
        any = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  if (x_max - x_min < 1e-12) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double left = 64, right = 16, top = 40, bottom = 48;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2.0) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         detail::svg_escape(title) + "</text>\n";

  // Gridlines and tick labels.
  const int ticks = 5;
  for (int i = 0; i < ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / (ticks - 1);
    const double fy = y_min + (y_max - y_min) * i / (ticks - 1);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n",
                  px(fx), py(y_min), px(fx), py(y_max));
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n",
                  px(x_min), py(fy), px(x_max), py(fy));
    svg += buf;
    svg += "<text x=\"" + detail::svg_num(px(fx)) + "\" y=\"" +
           detail::svg_num(height - bottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::svg_num(fx) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(left - 8) + "\" y=\"" + detail::svg_num(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::svg_num(fy) + "</text>\n";
  }

  // Axes.
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                px(x_min), py(y_min), px(x_max), py(y_min));
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                px(x_min), py(y_min), px(x_min), py(y_max));
  svg += buf;
  svg += "<text x=\"" + detail::svg_num(left + plot_w / 2) + "\" y=\"" +
         detail::svg_num(height - 10.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         detail::svg_escape(x_label) + "</text>\n";
  svg += "<text x=\"14\" y=\"" + detail::svg_num(top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 " +
         detail::svg_num(top + plot_h / 2) + ")\">" + detail::svg_escape(y_label) +
         "</text>\n";

  // Series polylines and legend.
  double legend_y = top + 8;
  for (const SvgSeries& s : series) {
    if (!s.points.empty()) {
      std::string pts;
      for (const auto& [x, y] : s.points) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(x), py(y));
        pts += buf;
      }
      svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\"";
      if (s.dashed) svg += " stroke-dasharray=\"6 4\"";
      svg += " points=\"" + pts + "\"/>\n";
    }
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"%s/>\n",
                  width - right - 150.0, legend_y, width - right - 120.0, legend_y,
                  s.color.c_str(), s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    svg += buf;
    svg += "<text x=\"" + detail::svg_num(width - right - 112.0) + "\" y=\"" +
           detail::svg_num(legend_y + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::svg_escape(s.label) + "</text>\n";
    legend_y += 16;
  }

  svg += "</svg>\n";
  return svg;
}

enum class SweepColumn { Value, Payment };

// Chart of one lambda's sweep rows: the exact curve plus the empirical one.
inline std::string sweep_svg(const std::vector<SweepRow>& rows, double lambda,
                             SweepColumn column, const std::string& title,
                             const std::string& x_label) {
  SvgSeries exact{"exact", "#1965b0", {}, false};
  SvgSeries empirical{"empirical", "#dc050c", {}, true};
  for (const SweepRow& r : rows) {
    if (r.lambda != lambda) continue;
    if (column == SweepColumn::Payment) {
      exact.points.emplace_back(r.param, r.expected_payment);
      empirical.points.emplace_back(r.param, r.empirical_payment);
    } else {
      exact.points.emplace_back(r.param, r.expected_value);
      empirical.points.emplace_back(r.param, r.empirical_value);
    }
  }
  const std::string y_label =
      column == SweepColumn::Payment ? "expected payment" : "expected value";
  return svg_line_chart(title, x_label, y_label, {exact, empirical});
}

}  // namespace mechlab
