#pragma once

#include <string>
#include <vector>

namespace gde {

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;  // optional, same length as y when present
};

/// Self-contained SVG line chart with optional error bars.
std::string render_line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series);

}  // namespace gde
