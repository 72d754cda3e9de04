#pragma once

#include <string>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit {

/// One polyline of a line chart. NaN values split the line.
struct SvgSeries {
    std::string label;
    std::string color = "#1f6fb2";
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Deterministic standalone SVG line chart with axes, tick labels and
/// optional vertical marker lines.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series,
                           const std::vector<double>& vertical_markers = {});

/// Scatter plot with the birth = death diagonal (persistence diagram).
std::string svg_scatter_diagonal(const std::string& title,
                                 const std::vector<double>& xs,
                                 const std::vector<double>& ys);

/// Black/white raster of a recurrence matrix, downsampled to at most
/// max_cells per side.
std::string svg_raster(const std::string& title, const RecurrenceMatrix& rm,
                       std::size_t max_cells = 1024);

}  // namespace delaykit
