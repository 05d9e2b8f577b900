#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cosymlab::cli {

namespace {

constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_scatter_svg(std::ostream& out, std::span<const ScatterSeries> series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  if (!std::isfinite(x0)) x0 = y0 = -1.0, x1 = y1 = 1.0;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;

  const double span = kPlotSize - 2.0 * kMargin;
  auto sx = [&](double x) { return kMargin + (x - x0) / (x1 - x0) * span; };
  auto sy = [&](double y) { return kPlotSize - kMargin - (y - y0) / (y1 - y0) * span; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotSize << "\" height=\"" << kPlotSize
      << "\" viewBox=\"0 0 " << kPlotSize << ' ' << kPlotSize << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kPlotSize / 2 << "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kMargin) << "\" width=\"" << fmt(span) << "\" height=\""
      << fmt(span) << "\" fill=\"none\" stroke=\"black\"/>\n";
  const std::string axis_font = "font-family=\"sans-serif\" font-size=\"12\"";
  out << "<text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kPlotSize - kMargin + 18) << "\" " << axis_font << ">"
      << tick(x0) << "</text>\n";
  out << "<text x=\"" << fmt(kPlotSize - kMargin) << "\" y=\"" << fmt(kPlotSize - kMargin + 18)
      << "\" text-anchor=\"end\" " << axis_font << ">" << tick(x1) << "</text>\n";
  out << "<text x=\"" << fmt(kMargin - 6) << "\" y=\"" << fmt(kPlotSize - kMargin) << "\" text-anchor=\"end\" "
      << axis_font << ">" << tick(y0) << "</text>\n";
  out << "<text x=\"" << fmt(kMargin - 6) << "\" y=\"" << fmt(kMargin + 12) << "\" text-anchor=\"end\" "
      << axis_font << ">" << tick(y1) << "</text>\n";
  out << "<text x=\"" << kPlotSize / 2 << "\" y=\"" << fmt(kPlotSize - 20) << "\" text-anchor=\"middle\" "
      << axis_font << ">" << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << kPlotSize / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kPlotSize / 2 << ")\" " << axis_font << ">" << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    out << "<g fill=\"" << colour << "\"><title>" << escape(series[i].label) << "</title>\n";
    for (const auto& p : series[i].points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      out << "<circle cx=\"" << fmt(sx(p[0])) << "\" cy=\"" << fmt(sy(p[1])) << "\" r=\"2\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace cosymlab::cli
