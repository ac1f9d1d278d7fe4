#pragma once

// Bare-bones semilog-x line plot written as standalone SVG.

#include <qkdrates/format.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkdrates {

struct PlotSeries {
  std::string label;
  std::string colour;
  std::vector<std::pair<double, double>> points;  // (x > 0, y)
  std::string dash;  // SVG stroke-dasharray, empty for solid
};

struct SemilogPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 800;
  int height = 560;
};

inline const std::array<const char*, 6>& series_colours() {
  static const std::array<const char*, 6> c{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  return c;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string to_svg(const SemilogPlot& plot) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = 0.0, ymax = -xmin;
  for (const auto& s : plot.series)
    for (auto [x, y] : s.points) {
      if (!(x > 0) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) {
    xmin = 1;
    xmax = 10;
    ymax = 1;
  }
  if (xmax <= xmin) xmax = xmin * 10;
  if (ymax <= ymin) ymax = ymin + 1;
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::ceil(std::log10(xmax));

  const double left = 70, right = 180, top = 40, bottom = 55;
  const double pw = plot.width - left - right, ph = plot.height - top - bottom;
  auto sx = [&](double x) { return left + (std::log10(x) - lx0) / std::max(lx1 - lx0, 1.0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  auto num = [](double v) { return format_double(v, 6); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
         std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::xml_escape(plot.title) + "</text>\n";

  for (double e = lx0; e <= lx1; e += 1.0) {
    const double x = sx(std::pow(10.0, e));
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = ymin + (ymax - ymin) * i / 5.0;
    const double y = sy(v);
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw) + "\" y2=\"" + num(y) +
           "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + format_double(v, 3) +
           "</text>\n";
  }
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(plot.height - 12.0) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(plot.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::xml_escape(plot.y_label) + "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    std::string pts;
    for (auto [x, y] : s.points)
      if (x > 0 && std::isfinite(y)) pts += num(sx(x)) + "," + num(sy(y)) + " ";
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + s.colour + "\"" +
           (s.dash.empty() ? std::string() : " stroke-dasharray=\"" + s.dash + "\"") + " points=\"" + pts + "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i) + 8;
    out += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 32) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + s.colour + "\"" + (s.dash.empty() ? std::string() : " stroke-dasharray=\"" + s.dash + "\"") + "/>\n";
    out += "<text x=\"" + num(left + pw + 36) + "\" y=\"" + num(ly + 4) + "\">" + detail::xml_escape(s.label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

inline void write_svg(const SemilogPlot& plot, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_svg(plot);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace qkdrates
