#include "delaykit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace delaykit {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double p = 0.04 * (hi - lo);
            lo -= p;
            hi += p;
        }
    }
};

std::string header(const std::string& title) {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
           num(kHeight) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(kWidth / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" +
           escape(title) + "</text>\n";
    return out;
}

std::string axes(const Range& xr, const Range& yr, const std::string& x_label,
                 const std::string& y_label) {
    std::string out;
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
           "\" y2=\"" + num(y0) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
           "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double px = x0 + (x1 - x0) * t / 4.0;
        out += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(y0 + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               num(fx) + "</text>\n";
        const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        const double py = y0 - (y0 - y1) * t / 4.0;
        out += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x0) +
               "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               num(fy) + "</text>\n";
    }
    out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           escape(x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 " +
           num((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
    return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series,
                           const std::vector<double>& vertical_markers) {
    Range xr, yr;
    for (const auto& s : series) {
        for (const double x : s.xs) xr.include(x);
        for (const double y : s.ys) yr.include(y);
    }
    for (const double m : vertical_markers) xr.include(m);
    xr.pad();
    yr.pad();
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

    std::string out = header(title);
    out += axes(xr, yr, x_label, y_label);
    for (const double m : vertical_markers) {
        out += "<line x1=\"" + num(px(m)) + "\" y1=\"" + num(y0) + "\" x2=\"" +
               num(px(m)) + "\" y2=\"" + num(y1) +
               "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    }
    double legend_y = kMarginTop + 6.0;
    for (const auto& s : series) {
        std::string points;
        bool open = false;
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            if (!std::isfinite(s.ys[i]) || !std::isfinite(s.xs[i])) {
                if (open) {
                    out += "<polyline fill=\"none\" stroke=\"" + s.color +
                           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
                    points.clear();
                    open = false;
                }
                continue;
            }
            points += num(px(s.xs[i])) + "," + num(py(s.ys[i])) + " ";
            open = true;
        }
        if (open)
            out += "<polyline fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        if (!s.label.empty()) {
            out += "<text x=\"" + num(kWidth - kMarginRight - 4) + "\" y=\"" +
                   num(legend_y) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
                   "fill=\"" +
                   s.color + "\">" + escape(s.label) + "</text>\n";
            legend_y += 16.0;
        }
    }
    out += "</svg>\n";
    return out;
}

std::string svg_scatter_diagonal(const std::string& title,
                                 const std::vector<double>& xs,
                                 const std::vector<double>& ys) {
    Range r;
    r.include(0.0);
    for (const double x : xs) r.include(x);
    for (const double y : ys) r.include(y);
    r.pad();
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    auto px = [&](double x) { return x0 + (x - r.lo) / (r.hi - r.lo) * (x1 - x0); };
    auto py = [&](double y) { return y0 - (y - r.lo) / (r.hi - r.lo) * (y0 - y1); };

    std::string out = header(title);
    out += axes(r, r, "birth", "death");
    out += "<line x1=\"" + num(px(r.lo)) + "\" y1=\"" + num(py(r.lo)) + "\" x2=\"" +
           num(px(r.hi)) + "\" y2=\"" + num(py(r.hi)) +
           "\" stroke=\"#888888\" stroke-dasharray=\"5 4\"/>\n";
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
        out += "<circle cx=\"" + num(px(xs[i])) + "\" cy=\"" + num(py(ys[i])) +
               "\" r=\"3\" fill=\"#b2361f\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string svg_raster(const std::string& title, const RecurrenceMatrix& rm,
                       std::size_t max_cells) {
    const std::size_t n = rm.size;
    const std::size_t block = n <= max_cells ? 1 : (n + max_cells - 1) / max_cells;
    const std::size_t cells = (n + block - 1) / block;
    const double plot = std::min(kWidth - kMarginLeft - kMarginRight,
                                 kHeight - kMarginTop - kMarginBottom);
    const double cell_px = plot / static_cast<double>(cells);

    std::string out = header(title);
    for (std::size_t bi = 0; bi < cells; ++bi) {
        // Row-wise run-length of set blocks keeps the file compact.
        std::size_t run_start = cells;
        auto flush = [&](std::size_t end) {
            if (run_start >= cells) return;
            const double x = kMarginLeft + cell_px * static_cast<double>(run_start);
            const double y = kMarginTop + cell_px * static_cast<double>(bi);
            const double w = cell_px * static_cast<double>(end - run_start);
            out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
                   "\" height=\"" + num(cell_px) + "\" fill=\"black\"/>\n";
            run_start = cells;
        };
        for (std::size_t bj = 0; bj < cells; ++bj) {
            bool any = false;
            for (std::size_t i = bi * block; i < std::min(n, (bi + 1) * block) && !any; ++i)
                for (std::size_t j = bj * block; j < std::min(n, (bj + 1) * block); ++j)
                    if (rm.at(i, j)) {
                        any = true;
                        break;
                    }
            if (any) {
                if (run_start >= cells) run_start = bj;
            } else {
                flush(bj);
            }
        }
        flush(cells);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace delaykit
