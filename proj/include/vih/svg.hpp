#pragma once

#include <string>
#include <vector>

namespace vih::io {

/// Minimal standalone SVG line charts; rendering is a pure function of the
/// input data so re-rendering from exported CSV reproduces the file.
struct Series {
    std::vector<std::pair<double, double>> pts;
    std::string color = "#1f6fb2";
    bool dashed = false;
    bool markers = false;  ///< draw point markers instead of a connected line
};

struct VLine {
    double x = 0.0;
    std::string label;
};

struct ChartSpec {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<VLine> vlines;
    int width = 860, height = 540;
};

[[nodiscard]] std::string render_chart(const ChartSpec& spec);

void write_text(const std::string& path, const std::string& text);

}  // namespace vih::io
