#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cosymlab::cli {

struct ScatterSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;
};

inline constexpr int kPlotSize = 800;

/// Scatter plot on a fixed 800 x 800 viewport, one colour per series.
void write_scatter_svg(std::ostream& out, std::span<const ScatterSeries> series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

}  // namespace cosymlab::cli
