#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fclab/csv.hpp"

namespace fclab {

// Renders two step-function curves over the unit square as a standalone
// SVG: axes and ticks as line/text elements, the curves as exactly two
// polyline elements (black = precise posterior, red = valid IM lower).
inline std::string render_cdf_svg(
    const std::vector<std::pair<double, double>>& curve_black,
    const std::vector<std::pair<double, double>>& curve_red,
    const std::string& title) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 50.0;
  const double span = kSize - 2.0 * kMargin;
  auto px = [&](double t) { return kMargin + t * span; };
  auto py = [&](double f) { return kSize - kMargin - f * span; };

  auto polyline = [&](const std::vector<std::pair<double, double>>& c,
                      const char* color) {
    std::string pts;
    double prev_f = 0.0;
    bool first = true;
    for (const auto& [t, f] : c) {
      if (!first) {
        // horizontal-then-vertical step
        pts += format_double(px(t)) + "," + format_double(py(prev_f)) + " ";
      }
      pts += format_double(px(t)) + "," + format_double(py(f)) + " ";
      prev_f = f;
      first = false;
    }
    if (!pts.empty()) pts.pop_back();
    return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
         "viewBox=\"0 0 480 480\">\n";
  svg += "  <title>" + title + "</title>\n";
  // axes
  svg += "  <line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) +
         "\" x2=\"" + format_double(px(1)) + "\" y2=\"" + format_double(py(0)) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "  <line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) +
         "\" x2=\"" + format_double(px(0)) + "\" y2=\"" + format_double(py(1)) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg += "  <text x=\"" + format_double(px(tick) - 10.0) + "\" y=\"" +
           format_double(py(0) + 18.0) + "\" font-size=\"11\">" +
           format_double(tick) + "</text>\n";
    svg += "  <text x=\"" + format_double(px(0) - 34.0) + "\" y=\"" +
           format_double(py(tick) + 4.0) + "\" font-size=\"11\">" +
           format_double(tick) + "</text>\n";
  }
  svg += polyline(curve_black, "black");
  svg += polyline(curve_red, "red");
  svg += "</svg>\n";
  return svg;
}

}  // namespace fclab
