#pragma once

#include <optional>
#include <string>
#include <vector>

namespace wavefdi::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes {
    std::string title;
    std::string xlabel;
    std::string ylabel;
};

/// Static line plot; `hline` draws a dashed horizontal reference line.
std::string line_plot(const Axes& axes, const std::vector<Series>& series,
                      std::optional<double> hline = std::nullopt, const std::string& hline_label = "");

/// Vertical bars, one per label; bar `highlight` (if any) drawn in a second colour.
std::string bar_chart(const Axes& axes, const std::vector<std::string>& labels, const std::vector<double>& values,
                      std::optional<std::size_t> highlight = std::nullopt);

}  // namespace wavefdi::svg
