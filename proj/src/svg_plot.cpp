#include "gde/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gde {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 30, kTop = 50, kBottom = 60;

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

}  // namespace

std::string render_line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double lo = s.y[i] - (i < s.yerr.size() ? s.yerr[i] : 0.0);
            const double hi = s.y[i] + (i < s.yerr.size() ? s.yerr[i] : 0.0);
            if (first) {
                xmin = xmax = s.x[i];
                ymin = lo;
                ymax = hi;
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, lo);
                ymax = std::max(ymax, hi);
            }
        }
    }
    ymin = std::min(ymin, 0.0);
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    ymax += 0.05 * (ymax - ymin);

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";

    // axes with 5 ticks each
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
        << "\" y2=\"" << kTop + ph << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + ph << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 5.0;
        const double yv = ymin + (ymax - ymin) * t / 5.0;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(xv)
            << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv)
            << "</text>\n";
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << kLeft
            << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
        << kTop + ph / 2 << ")\">" << y_label << "</text>\n";

    double legend_y = kTop + 8;
    for (const auto& s : series) {
        std::ostringstream path;
        for (size_t i = 0; i < s.x.size(); ++i) {
            path << (i ? " L " : "M ") << num(px(s.x[i])) << " " << num(py(s.y[i]));
        }
        svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        for (size_t i = 0; i < s.x.size(); ++i) {
            svg << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
                << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            if (i < s.yerr.size() && s.yerr[i] > 0.0) {
                const double x = px(s.x[i]);
                svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(s.y[i] - s.yerr[i]))
                    << "\" x2=\"" << num(x) << "\" y2=\"" << num(py(s.y[i] + s.yerr[i]))
                    << "\" stroke=\"" << s.color << "\"/>\n";
                for (double yy : {s.y[i] - s.yerr[i], s.y[i] + s.yerr[i]}) {
                    svg << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(py(yy)) << "\" x2=\""
                        << num(x + 4) << "\" y2=\"" << num(py(yy)) << "\" stroke=\"" << s.color
                        << "\"/>\n";
                }
            }
        }
        svg << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << legend_y << "\" x2=\""
            << kLeft + pw - 125 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kLeft + pw - 118 << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        legend_y += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace gde
