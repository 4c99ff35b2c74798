#include "panelval/plot.hpp"

#include <algorithm>
#include <sstream>

#include "panelval/common.hpp"

namespace panelval {

namespace {

constexpr int kMargin = 50;

struct Mapper {
    int width, height;
    double sx(double v) const { return kMargin + v * (width - 2 * kMargin); }
    double sy(double v) const { return height - kMargin - v * (height - 2 * kMargin); }
};

std::string polyline(const std::vector<CurvePoint>& curve, double CurvePoint::* field,
                     const Mapper& m, const std::string& style) {
    std::ostringstream ss;
    ss.precision(2);
    ss << std::fixed << "  <polyline fill=\"none\" " << style << " points=\"";
    for (const auto& pt : curve) {
        const double y = std::clamp(pt.*field, 0.0, 1.0);
        ss << m.sx(pt.predicted) << ',' << m.sy(y) << ' ';
    }
    ss << "\"/>\n";
    return ss.str();
}

} // namespace

std::string calibration_curve_svg(const std::vector<CurvePoint>& curve, int width, int height) {
    if (curve.empty()) throw InputError("calibration_curve_svg: empty curve");
    const Mapper m{width, height};
    std::ostringstream svg;
    svg.precision(2);
    svg << std::fixed;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    svg << "  <line x1=\"" << m.sx(0) << "\" y1=\"" << m.sy(0) << "\" x2=\"" << m.sx(1)
        << "\" y2=\"" << m.sy(0) << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << m.sx(0) << "\" y1=\"" << m.sy(0) << "\" x2=\"" << m.sx(0)
        << "\" y2=\"" << m.sy(1) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 10; t += 2) {
        const double v = t / 10.0;
        svg << "  <text x=\"" << m.sx(v) << "\" y=\"" << (m.sy(0) + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << v << "</text>\n";
        svg << "  <text x=\"" << (m.sx(0) - 8) << "\" y=\"" << (m.sy(v) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << v << "</text>\n";
        svg << "  <line x1=\"" << m.sx(v) << "\" y1=\"" << m.sy(0) << "\" x2=\"" << m.sx(v)
            << "\" y2=\"" << (m.sy(0) + 4) << "\" stroke=\"black\"/>\n";
        svg << "  <line x1=\"" << m.sx(0) << "\" y1=\"" << m.sy(v) << "\" x2=\""
            << (m.sx(0) - 4) << "\" y2=\"" << m.sy(v) << "\" stroke=\"black\"/>\n";
    }
    svg << "  <text x=\"" << m.sx(0.5) << "\" y=\"" << (height - 10)
        << "\" font-size=\"13\" text-anchor=\"middle\">Predicted probability</text>\n";
    svg << "  <text x=\"14\" y=\"" << m.sy(0.5)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << m.sy(0.5)
        << ")\">Actual probability</text>\n";
    // identity diagonal
    svg << "  <line x1=\"" << m.sx(0) << "\" y1=\"" << m.sy(0) << "\" x2=\"" << m.sx(1)
        << "\" y2=\"" << m.sy(1)
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1\"/>\n";
    svg << polyline(curve, &CurvePoint::apparent, m,
                    "stroke=\"#888888\" stroke-width=\"1.5\"");
    svg << polyline(curve, &CurvePoint::bias_corrected, m,
                    "stroke=\"#cc2222\" stroke-width=\"2\"");
    svg << "  <text x=\"" << (width - kMargin) << "\" y=\"" << (kMargin - 18)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#888888\">apparent</text>\n";
    svg << "  <text x=\"" << (width - kMargin) << "\" y=\"" << (kMargin - 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#cc2222\">bias-corrected</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace panelval
