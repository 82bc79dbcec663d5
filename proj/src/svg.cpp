#include "retdecomp/svg.hpp"

#include "retdecomp/errors.hpp"
#include "retdecomp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace retdecomp {

namespace {

constexpr int kCell = 24;
constexpr int kMargin = 48;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
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

std::string header(int width, int height)
{
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
           "width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11)
{
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string heatmap_svg(const HeatmapSpec& spec)
{
    const Tensor& p = spec.probabilities;
    if (p.size() == 0) throw UsageError("heatmap: empty matrix");
    if (!spec.row_labels.empty() && spec.row_labels.size() != static_cast<std::size_t>(p.rows()))
        throw UsageError("heatmap: row label count mismatch");
    if (!spec.col_labels.empty() && spec.col_labels.size() != static_cast<std::size_t>(p.cols()))
        throw UsageError("heatmap: column label count mismatch");
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (!(p.data()[i] >= 0.0 && p.data()[i] <= 1.0)) throw UsageError("heatmap: cell outside [0, 1]");
    const int rows = static_cast<int>(p.rows()), cols = static_cast<int>(p.cols());
    const int width = 2 * kMargin + cols * kCell, height = 2 * kMargin + rows * kCell;
    std::string out = header(width, height);
    if (!spec.title.empty()) out += text(width / 2.0, kMargin / 2.0, spec.title, "middle", 13);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int g = static_cast<int>(std::lround(255.0 * (1.0 - p(r, c))));
            out += "<rect class=\"cell\" x=\"" + std::to_string(kMargin + c * kCell) + "\" y=\"" +
                   std::to_string(kMargin + r * kCell) + "\" width=\"" + std::to_string(kCell) + "\" height=\"" +
                   std::to_string(kCell) + "\" fill=\"rgb(" + std::to_string(g) + "," + std::to_string(g) + "," +
                   std::to_string(g) + ")\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
        }
    for (int r = 0; r < rows; r += 5) {
        const std::string label = spec.row_labels.empty() ? std::to_string(r) : spec.row_labels[r];
        out += text(kMargin - 4, kMargin + r * kCell + kCell * 0.65, label, "end");
    }
    for (int c = 0; c < cols; c += 5) {
        const std::string label = spec.col_labels.empty() ? std::to_string(c) : spec.col_labels[c];
        out += text(kMargin + c * kCell + kCell / 2.0, kMargin + rows * kCell + 14, label);
    }
    out += "</svg>\n";
    return out;
}

void emit_heatmap_svg(const HeatmapSpec& spec, const std::filesystem::path& path)
{
    write_text_file(path, heatmap_svg(spec));
}

std::string line_chart_svg(std::span<const Series> series, const std::string& title, const std::string& x_label,
                           const std::string& y_label)
{
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw UsageError("line chart: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) throw UsageError("line chart: no finite points");
    if (x1 == x0) { x0 -= 1; x1 += 1; }
    if (y1 == y0) { y0 -= 1; y1 += 1; }
    const double w = 480, h = 300, left = 64, top = 32;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * h; };
    std::string out = header(static_cast<int>(left + w + 140), static_cast<int>(top + h + 48));
    out += text(left + w / 2, 18, title, "middle", 13);
    out += "<polyline class=\"axes\" fill=\"none\" stroke=\"#000\" points=\"" + num(left) + "," + num(top) + " " +
           num(left) + "," + num(top + h) + " " + num(left + w) + "," + num(top + h) + "\"/>\n";
    out += text(left + w / 2, top + h + 36, x_label);
    out += text(left - 6, top + 4, num(y1), "end");
    out += text(left - 6, top + h, num(y0), "end");
    out += text(left, top + h + 16, num(x0));
    out += text(left + w, top + h + 16, num(x1));
    out += "<text x=\"14\" y=\"" + num(top + h / 2) + "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 14 " + num(top + h / 2) + ")\">" + escape(y_label) +
           "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        if (s.x.size() == 1) {
            out += "<circle class=\"marker\" cx=\"" + num(px(s.x[0])) + "\" cy=\"" + num(py(s.y[0])) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        } else if (!s.x.empty()) {
            out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out += num(px(s.x[i])) + "," + num(py(s.y[i])) + (i + 1 < s.x.size() ? " " : "");
            }
            out += "\"/>\n";
        }
        out += "<line x1=\"" + num(left + w + 12) + "\" y1=\"" + num(top + 14 * k + 10) + "\" x2=\"" +
               num(left + w + 28) + "\" y2=\"" + num(top + 14 * k + 10) + "\" stroke=\"" + color + "\"/>\n";
        out += text(left + w + 32, top + 14 * k + 14, s.label, "start");
    }
    out += "</svg>\n";
    return out;
}

std::string learning_curve_svg(std::span<const double> steps, std::span<const double> returns, int window,
                               const std::string& title)
{
    if (steps.empty() || steps.size() != returns.size()) throw UsageError("learning curve: need matching, non-empty series");
    const std::vector<double> smooth = ema(returns, window);
    const Series s{"ema(" + std::to_string(window) + ")", {steps.begin(), steps.end()}, smooth};
    return line_chart_svg(std::span<const Series>(&s, 1), title, "env steps", "average return");
}

void emit_learning_curve_svg(std::span<const double> steps, std::span<const double> returns,
                             const std::filesystem::path& path, int window)
{
    write_text_file(path, learning_curve_svg(steps, returns, window));
}

void write_text_file(const std::filesystem::path& path, const std::string& body)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace retdecomp
