#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace dissipcert::cli {

// Line plot with a log10 x axis and a linear, auto-scaled y axis.  Points
// with a non-positive x or a non-finite y are dropped; at least one point
// must survive (ArgumentError otherwise).  Returns a complete standalone
// SVG document, deterministically formatted.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<double>& x,
                          const std::vector<double>& y);

// Cell-shaded phase diagram over [x0,x1] x [y0,y1].  `cells` is row-major
// with ny rows of nx entries (row 0 at y0, column 0 at x0), one class per
// sample point: 0, 1, or 2, colored red / blue / amber and named by
// `class_labels` in the legend.  `boundary` is an overlaid polyline in data
// coordinates (an analytic curve; may be empty).  Returns a complete
// standalone SVG document, deterministically formatted.
std::string phase_diagram_svg(
    const std::string& title, const std::string& x_label,
    const std::string& y_label, double x0, double x1, double y0, double y1,
    int nx, int ny, const std::vector<int>& cells,
    const std::vector<std::pair<double, double>>& boundary,
    const std::array<std::string, 3>& class_labels);

}  // namespace dissipcert::cli
