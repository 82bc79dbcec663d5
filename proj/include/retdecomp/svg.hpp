#pragma once

#include "retdecomp/tensor.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace retdecomp {

/// Probability grid drawn darker for higher values.
struct HeatmapSpec {
    Tensor probabilities;  // entries in [0, 1]
    std::vector<std::string> row_labels;  // optional, one per row
    std::vector<std::string> col_labels;  // optional, one per column
    std::string title;
};

/// One <rect class="cell"> per entry, fill gray 255 * (1 - p), tick labels
/// every 5 cells. Throws UsageError on values outside [0, 1].
std::string heatmap_svg(const HeatmapSpec& spec);
void emit_heatmap_svg(const HeatmapSpec& spec, const std::filesystem::path& path);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line chart; a series with a single point is drawn as one marker.
std::string line_chart_svg(std::span<const Series> series, const std::string& title, const std::string& x_label,
                           const std::string& y_label);

/// Average return against env steps, EMA-smoothed over `window` points.
std::string learning_curve_svg(std::span<const double> steps, std::span<const double> returns, int window = 10,
                               const std::string& title = "average return");
void emit_learning_curve_svg(std::span<const double> steps, std::span<const double> returns,
                             const std::filesystem::path& path, int window = 10);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace retdecomp
