#pragma once

#include <string>
#include <vector>

namespace levlab {

enum class PlotKind { Line, Scatter, ComplexPlane };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Standalone deterministic SVG with axes, ticks, and a legend. ComplexPlane
/// draws each series as a polyline with point markers (x = Re, y = Im).
std::string render_svg(const std::vector<Series>& series, PlotKind kind, const std::string& title = {},
                       const std::string& x_label = {}, const std::string& y_label = {});

}  // namespace levlab
