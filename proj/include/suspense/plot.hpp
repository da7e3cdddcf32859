#pragma once

// Minimal SVG line chart of z-scored measure curves for one story.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "suspense/io.hpp"
#include "suspense/measure_io.hpp"
#include "suspense/measures.hpp"

namespace suspense {

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

inline std::string fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

}  // namespace detail

struct PlotCurve {
  std::string label;
  Series values;
};

/// One polyline per curve. Curves are z-scored where possible; constant
/// curves are drawn at zero.
inline void write_svg(std::ostream& out, const std::string& title, const std::vector<PlotCurve>& curves) {
  constexpr double width = 800, height = 400, margin = 50, legend_w = 160;
  constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::vector<Series> scaled;
  std::size_t n = 2;
  double lo = -1.0, hi = 1.0;
  for (const auto& c : curves) {
    Series z;
    try {
      z = zscore(c.values);
    } catch (const Error&) {
      z = c.values;
      for (auto& v : z)
        if (v) v = 0.0;
    }
    for (const auto& v : z)
      if (v) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    n = std::max(n, z.size());
    scaled.push_back(std::move(z));
  }
  const double plot_w = width - 2 * margin - legend_w, plot_h = height - 2 * margin;
  auto px = [&](std::size_t i) { return margin + plot_w * static_cast<double>(i) / static_cast<double>(n - 1); };
  auto py = [&](double v) { return margin + plot_h * (hi - v) / (hi - lo); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "  <title>" << detail::xml_escape(title) << "</title>\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << margin << "\" y1=\"" << detail::fixed(py(0.0)) << "\" x2=\"" << margin + plot_w
      << "\" y2=\"" << detail::fixed(py(0.0)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  out << "  <text x=\"" << margin << "\" y=\"" << margin / 2 << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << detail::xml_escape(title) << "</text>\n";
  for (std::size_t c = 0; c < scaled.size(); ++c) {
    const char* colour = palette[c % palette.size()];
    out << "  <polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" data-label=\""
        << detail::xml_escape(curves[c].label) << "\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < scaled[c].size(); ++i) {
      if (!scaled[c][i]) continue;
      out << (first ? "" : " ") << detail::fixed(px(i)) << ',' << detail::fixed(py(*scaled[c][i]));
      first = false;
    }
    out << "\"/>\n";
    const double ly = margin + 20.0 * static_cast<double>(c);
    out << "  <text x=\"" << width - legend_w << "\" y=\"" << ly << "\" fill=\"" << colour
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(curves[c].label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace suspense
