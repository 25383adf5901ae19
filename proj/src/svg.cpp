#include "levlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 64.0, kRight = 20.0, kTop = 34.0, kBottom = 46.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                         "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
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

// 1-2-5 tick spacing
std::vector<double> ticks(double lo, double hi, int target = 6) {
    std::vector<double> out;
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 0.5 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
}

struct Mapper {
    double x0, x1, y0, y1;
    double px(double x) const {
        const double r = x1 > x0 ? (x - x0) / (x1 - x0) : 0.5;
        return kLeft + r * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        const double r = y1 > y0 ? (y - y0) / (y1 - y0) : 0.5;
        return kHeight - kBottom - r * (kHeight - kTop - kBottom);
    }
};

}  // namespace

std::string render_svg(const std::vector<Series>& series, PlotKind kind, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw EmptySeries("render_svg: no series given");
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw EmptySeries("render_svg: series '" + s.name + "' is empty or ragged");
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                throw EmptySeries("render_svg: series '" + s.name + "' has non-finite values");
    }

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { x0 = std::min(x0, v); x1 = std::max(x1, v); }
        for (double v : s.y) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
    }
    if (x1 <= x0) { x0 -= 1.0; x1 += 1.0; }
    if (y1 <= y0) { y0 -= 1.0; y1 += 1.0; }
    const double xpad = 0.04 * (x1 - x0), ypad = 0.06 * (y1 - y0);
    Mapper m{x0 - xpad, x1 + xpad, y0 - ypad, y1 + ypad};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        svg << "  <text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
            << "font-family=\"sans-serif\">" << xml_escape(title) << "</text>\n";

    svg << "  <g stroke=\"#d0d0d0\" stroke-width=\"1\">\n";
    for (double t : ticks(m.x0, m.x1)) {
        const double px = m.px(t);
        svg << "    <line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px) << "\" y2=\""
            << fmt(kHeight - kBottom) << "\"/>\n";
    }
    for (double t : ticks(m.y0, m.y1)) {
        const double py = m.py(t);
        svg << "    <line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kWidth - kRight)
            << "\" y2=\"" << fmt(py) << "\"/>\n";
    }
    svg << "  </g>\n";

    svg << "  <g font-size=\"11\" font-family=\"sans-serif\" fill=\"#333333\">\n";
    for (double t : ticks(m.x0, m.x1))
        svg << "    <text x=\"" << fmt(m.px(t)) << "\" y=\"" << fmt(kHeight - kBottom + 16)
            << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    for (double t : ticks(m.y0, m.y1))
        svg << "    <text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(m.py(t) + 4)
            << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    if (!x_label.empty())
        svg << "    <text x=\"" << (kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << (kHeight - 8)
            << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
    if (!y_label.empty())
        svg << "    <text x=\"14\" y=\"" << (kTop + (kHeight - kTop - kBottom) / 2)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
            << (kTop + (kHeight - kTop - kBottom) / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
    svg << "  </g>\n";

    svg << "  <rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << (kWidth - kLeft - kRight)
        << "\" height=\"" << (kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"#000000\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        const bool line = kind == PlotKind::Line || kind == PlotKind::ComplexPlane;
        const bool marks = kind == PlotKind::Scatter || kind == PlotKind::ComplexPlane || s.x.size() == 1;
        if (line && s.x.size() > 1) {
            svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i) svg << ' ';
                svg << fmt(m.px(s.x[i])) << ',' << fmt(m.py(s.y[i]));
            }
            svg << "\"/>\n";
        }
        if (marks) {
            svg << "  <g fill=\"" << color << "\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                svg << "    <circle cx=\"" << fmt(m.px(s.x[i])) << "\" cy=\"" << fmt(m.py(s.y[i]))
                    << "\" r=\"2.2\"/>\n";
            svg << "  </g>\n";
        }
    }

    svg << "  <g font-size=\"11\" font-family=\"sans-serif\">\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double ly = kTop + 14 + 15 * static_cast<double>(si);
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        svg << "    <rect x=\"" << (kWidth - kRight - 130) << "\" y=\"" << fmt(ly - 8)
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        svg << "    <text x=\"" << (kWidth - kRight - 116) << "\" y=\"" << fmt(ly + 1) << "\">"
            << xml_escape(series[si].name) << "</text>\n";
    }
    svg << "  </g>\n</svg>\n";
    return svg.str();
}

}  // namespace levlab
