#include "wavefdi/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavefdi::svg {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi - lo < 1e-300) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

std::string header(const Axes& a) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n"
        "<text x=\"{2}\" y=\"{4}\" text-anchor=\"middle\">{5}</text>\n"
        "<text x=\"16\" y=\"{6}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {6})\">{7}</text>\n",
        kWidth, kHeight, kLeft + (kWidth - kLeft - kRight) / 2, escape(a.title), kHeight - 12, escape(a.xlabel),
        kTop + (kHeight - kTop - kBottom) / 2, escape(a.ylabel));
}

std::string frame(const Range& xr, const Range& yr, bool x_ticks) {
    const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
    std::string s = fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                                kLeft, kTop, w, h);
    for (int i = 0; i <= 4; ++i) {
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const double py = kTop + h - h * i / 4.0;
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6, py + 4, fy);
        if (x_ticks) {
            const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
            const double px = kLeft + w * i / 4.0;
            s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px, kTop + h + 16, fx);
        }
    }
    return s;
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series, std::optional<double> hline,
                      const std::string& hline_label) {
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    if (hline) yr.add(*hline);
    xr.finish();
    yr.finish();
    const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + w * (x - xr.lo) / (xr.hi - xr.lo); };
    auto py = [&](double y) { return kTop + h - h * (y - yr.lo) / (yr.hi - yr.lo); };

    std::string out = header(axes) + frame(xr, yr, true);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
            if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
            pts += fmt::format("{:.2f},{:.2f} ", px(s.x[j]), py(s.y[j]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
        if (!s.label.empty())
            out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 10, kTop + 16 + 15 * i, colour,
                               escape(s.label));
    }
    if (hline) {
        out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n",
                           kLeft, py(*hline), kLeft + w, py(*hline));
        if (!hline_label.empty())
            out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\" fill=\"gray\">{}</text>\n", kLeft + w - 4,
                               py(*hline) - 4, escape(hline_label));
    }
    return out + "</svg>\n";
}

std::string bar_chart(const Axes& axes, const std::vector<std::string>& labels, const std::vector<double>& values,
                      std::optional<std::size_t> highlight) {
    Range yr;
    yr.add(0.0);
    for (double v : values) yr.add(v);
    yr.finish();
    const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
    const std::size_t n = std::max<std::size_t>(values.size(), 1);
    const double slot = w / static_cast<double>(n);
    auto py = [&](double y) { return kTop + h - h * (y - yr.lo) / (yr.hi - yr.lo); };

    std::string out = header(axes) + frame(yr, yr, false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double top = py(std::max(values[i], 0.0));
        const double base = py(std::min(values[i], 0.0));
        const char* colour = highlight && *highlight == i ? kPalette[1] : kPalette[0];
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                           kLeft + slot * i + 0.1 * slot, top, 0.8 * slot, std::max(base - top, 0.0), colour);
        if (i < labels.size() && (n <= 30 || i % 2 == 0))
            out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
                               kLeft + slot * (i + 0.5), kTop + h + 14, escape(labels[i]));
    }
    return out + "</svg>\n";
}

}  // namespace wavefdi::svg
