#pragma once

#include "jumpdiff/csv.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

namespace jumpdiff {

//! One polyline of a chart.
struct SvgSeries {
  std::string label;
  std::string color = "#000000";
  bool dashed = false;
  std::vector<double> ys;
};

//! Minimal SVG 1.1 line chart: axes box, series polylines, legend.
inline void write_line_chart(std::ostream& os, const std::string& title,
                             const std::vector<double>& xs,
                             const std::vector<SvgSeries>& series) {
  const double w = 720.0, h = 480.0, ml = 60.0, mr = 20.0, mt = 40.0, mb = 40.0;
  double xmin = xs.empty() ? 0.0 : xs.front(), xmax = xs.empty() ? 1.0 : xs.back();
  double ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (double y : s.ys) {
      if (first) {
        ymin = ymax = y;
        first = false;
      } else {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  const auto py = [&](double y) {
    return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);
  };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n"
     << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
     << "\" height=\"" << h - mt - mb
     << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  // axis extrema labels
  os << "<text x=\"" << ml << "\" y=\"" << h - mb + 16
     << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(xmin)
     << "</text>\n"
     << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_number(xmax) << "</text>\n"
     << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_number(ymin) << "</text>\n"
     << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << format_number(ymax) << "</text>\n";

  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < xs.size() && i < s.ys.size(); ++i) {
      if (i) os << ' ';
      os << format_number(px(xs[i])) << ',' << format_number(py(s.ys[i]));
    }
    os << "\"/>\n";
  }
  double ly = mt + 16.0;
  for (const auto& s : series) {
    os << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + 40
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << "/>\n"
       << "<text x=\"" << ml + 46 << "\" y=\"" << ly
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
    ly += 16.0;
  }
  os << "</svg>\n";
}

} // namespace jumpdiff
