#include "vih/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vih::io {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Range {
    double lo = 0.0, hi = 1.0;

    void include(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    void pad() {
        if (hi <= lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

}  // namespace

std::string render_chart(const ChartSpec& spec) {
    const double ml = 72, mr = 24, mt = 44, mb = 52;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;

    Range rx, ry;
    bool seeded = false;
    for (const auto& s : spec.series)
        for (const auto& [x, y] : s.pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!seeded) {
                rx = {x, x};
                ry = {y, y};
                seeded = true;
            } else {
                rx.include(x);
                ry.include(y);
            }
        }
    for (const auto& v : spec.vlines) {
        if (!seeded) {
            rx = {v.x, v.x};
            ry = {0, 1};
            seeded = true;
        } else {
            rx.include(v.x);
        }
    }
    rx.pad();
    ry.pad();

    auto px = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
       << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<style>text{font-family:sans-serif;fill:#333}</style>\n";

    // frame and ticks
    os << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    const int nt = 6;
    for (int i = 0; i <= nt; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / nt;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / nt;
        os << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << num(mt + ph) << "\" x2=\""
           << num(px(fx)) << "\" y2=\"" << num(mt + ph + 5) << "\" stroke=\"#888\"/>\n"
           << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(mt + ph + 18)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << num(fx) << "</text>\n"
           << "<line x1=\"" << num(ml - 5) << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << num(ml)
           << "\" y2=\"" << num(py(fy)) << "\" stroke=\"#888\"/>\n"
           << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(py(fy) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }

    for (const auto& v : spec.vlines) {
        os << "<line x1=\"" << num(px(v.x)) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(px(v.x))
           << "\" y2=\"" << num(mt + ph)
           << "\" stroke=\"#999\" stroke-dasharray=\"5,4\"/>\n";
        if (!v.label.empty())
            os << "<text x=\"" << num(px(v.x) + 4) << "\" y=\"" << num(mt + 14)
               << "\" font-size=\"11\">" << v.label << "</text>\n";
    }

    for (const auto& s : spec.series) {
        if (s.markers) {
            for (const auto& [x, y] : s.pts) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
                   << "\" r=\"2.4\" fill=\"" << s.color << "\"/>\n";
            }
            continue;
        }
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
        if (s.dashed) os << " stroke-dasharray=\"6,4\"";
        os << " points=\"";
        for (const auto& [x, y] : s.pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            os << num(px(x)) << ',' << num(py(y)) << ' ';
        }
        os << "\"/>\n";
    }

    if (!spec.title.empty())
        os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"24\" font-size=\"15\" "
           << "text-anchor=\"middle\">" << spec.title << "</text>\n";
    if (!spec.xlabel.empty())
        os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(spec.height - 12)
           << "\" font-size=\"12\" text-anchor=\"middle\">" << spec.xlabel << "</text>\n";
    if (!spec.ylabel.empty())
        os << "<text x=\"16\" y=\"" << num(mt + ph / 2)
           << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           << num(mt + ph / 2) << ")\">" << spec.ylabel << "</text>\n";

    os << "</svg>\n";
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
}

}  // namespace vih::io
