#include "fairgauge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fairgauge {

namespace {

// fixed two-decimal coordinates keep the output stable
std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// file-name-safe label: alnum kept, the rest becomes '_'
std::string slug(const std::string& s) {
    std::string out;
    for (unsigned char c : s) out += std::isalnum(c) ? (char)std::tolower(c) : '_';
    return out;
}

void line(std::ostringstream& svg, double x1, double y1, double x2, double y2,
          const char* stroke, double width) {
    svg << "<line x1=\"" << coord(x1) << "\" y1=\"" << coord(y1) << "\" x2=\"" << coord(x2)
        << "\" y2=\"" << coord(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width
        << "\"/>\n";
}

void rect(std::ostringstream& svg, double x, double y, double w, double h, const std::string& fill,
          const char* stroke) {
    svg << "<rect x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" width=\"" << coord(w)
        << "\" height=\"" << coord(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
        << "\"/>\n";
}

void text(std::ostringstream& svg, double x, double y, const std::string& s, int size,
          const char* anchor = "start") {
    svg << "<text x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" font-size=\"" << size
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s)
        << "</text>\n";
}

}  // namespace

std::string boxplot_svg(const std::string& title, const std::string& axis_label,
                        const std::vector<BoxRow>& rows) {
    double lo = 0.0, hi = 1.0;
    if (!rows.empty()) {
        lo = rows.front().min;
        hi = rows.front().max;
        for (const BoxRow& r : rows) {
            lo = std::min(lo, r.min);
            hi = std::max(hi, r.max);
        }
    }
    if (hi == lo) {  // degenerate span: center a unit window on the value
        lo -= 0.5;
        hi += 0.5;
    }
    auto x_of = [&](double v) { return kPlotLeft + (v - lo) / (hi - lo) * kPlotWidth; };

    double height = kHeaderHeight + kRowHeight * (double)rows.size() + kFooterHeight;
    double width = kPlotLeft + kPlotWidth + 40.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width) << "\" height=\""
        << coord(height) << "\">\n";
    rect(svg, 0, 0, width, height, "white", "none");
    text(svg, 10, 24, title, 16);

    double axis_y = kHeaderHeight + kRowHeight * (double)rows.size() + 8.0;
    line(svg, kPlotLeft, axis_y, kPlotLeft + kPlotWidth, axis_y, "#333333", 1);
    for (int i = 0; i <= 4; ++i) {
        double v = lo + (hi - lo) * (double)i / 4.0;
        double x = x_of(v);
        line(svg, x, axis_y, x, axis_y + 5, "#333333", 1);
        text(svg, x, axis_y + 18, num(v), 10, "middle");
    }
    text(svg, kPlotLeft + kPlotWidth / 2.0, axis_y + 34, axis_label, 11, "middle");

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BoxRow& r = rows[i];
        double top = kHeaderHeight + kRowHeight * (double)i;
        double mid = top + kRowHeight / 2.0;
        double box_top = top + 8.0;
        double box_h = kRowHeight - 16.0;

        text(svg, kPlotLeft - 10, mid + 4, r.label, 12, "end");
        // whiskers
        line(svg, x_of(r.min), mid, x_of(r.q1), mid, "#555555", 1.5);
        line(svg, x_of(r.q3), mid, x_of(r.max), mid, "#555555", 1.5);
        line(svg, x_of(r.min), box_top, x_of(r.min), box_top + box_h, "#555555", 1.5);
        line(svg, x_of(r.max), box_top, x_of(r.max), box_top + box_h, "#555555", 1.5);
        // interquartile box and median
        rect(svg, x_of(r.q1), box_top, x_of(r.q3) - x_of(r.q1), box_h, "#9ecae1", "#333333");
        line(svg, x_of(r.median), box_top, x_of(r.median), box_top + box_h, "#08306b", 2);
    }

    svg << "</svg>\n";
    return svg.str();
}

namespace {

std::string sequential_color(double v, double vmax) {
    // white -> green ramp
    double t = vmax > 0.0 ? std::clamp(v / vmax, 0.0, 1.0) : 0.0;
    int r = (int)std::lround(247.0 - t * (247.0 - 0.0));
    int g = (int)std::lround(252.0 - t * (252.0 - 109.0));
    int b = (int)std::lround(245.0 - t * (245.0 - 44.0));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string diverging_color(double v, double vmax) {
    // blue (negative) -> white -> red (positive)
    double t = vmax > 0.0 ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
    int r, g, b;
    if (t >= 0) {
        r = 255;
        g = (int)std::lround(255.0 - t * 178.0);
        b = (int)std::lround(255.0 - t * 213.0);
    } else {
        r = (int)std::lround(255.0 + t * 222.0);
        g = (int)std::lround(255.0 + t * 138.0);
        b = 255;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string heat_table_svg(const std::string& title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<std::optional<double>>>& values,
                           bool diverging) {
    constexpr double kCellW = 84.0, kCellH = 26.0, kLeft = 170.0, kTop = 90.0;
    double width = kLeft + kCellW * (double)col_labels.size() + 30.0;
    double height = kTop + kCellH * (double)row_labels.size() + 30.0;

    double vmax = 0.0;
    for (const auto& row : values)
        for (const auto& v : row)
            if (v) vmax = std::max(vmax, std::fabs(*v));

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width) << "\" height=\""
        << coord(height) << "\">\n";
    rect(svg, 0, 0, width, height, "white", "none");
    text(svg, 10, 24, title, 16);

    for (std::size_t c = 0; c < col_labels.size(); ++c) {
        double x = kLeft + kCellW * (double)c + kCellW / 2.0;
        svg << "<text x=\"" << coord(x) << "\" y=\"" << coord(kTop - 8) << "\" font-size=\"10\""
            << " font-family=\"sans-serif\" text-anchor=\"start\" transform=\"rotate(-35 "
            << coord(x) << ' ' << coord(kTop - 8) << ")\">" << escape(col_labels[c])
            << "</text>\n";
    }

    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        double y = kTop + kCellH * (double)r;
        text(svg, kLeft - 8, y + kCellH / 2.0 + 4, row_labels[r], 11, "end");
        for (std::size_t c = 0; c < col_labels.size(); ++c) {
            double x = kLeft + kCellW * (double)c;
            const std::optional<double>& v =
                r < values.size() && c < values[r].size() ? values[r][c] : std::nullopt;
            if (v) {
                std::string fill =
                    diverging ? diverging_color(*v, vmax) : sequential_color(*v, vmax);
                rect(svg, x, y, kCellW, kCellH, fill, "#cccccc");
                text(svg, x + kCellW / 2.0, y + kCellH / 2.0 + 4, num(*v), 9, "middle");
            } else {
                rect(svg, x, y, kCellW, kCellH, "#eeeeee", "#cccccc");
                text(svg, x + kCellW / 2.0, y + kCellH / 2.0 + 4, "n/a", 9, "middle");
            }
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> render_report(const SummaryReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto emit = [&](const std::string& name, const std::string& content) {
        fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        out << content;
        written.push_back(p.string());
    };

    auto box_of = [](const std::string& label, const Summary& s) {
        return BoxRow{label, s.min, s.q1, s.median, s.q3, s.max};
    };

    for (const VariantBlock& vb : report.variants) {
        // gap boxplots: one file per (metric, class), one box per size
        for (MetricKind kind : kAllMetricKinds)
            for (const std::string& label : report.filter.retained) {
                std::vector<BoxRow> rows;
                for (const SizeBlock& sb : vb.sizes)
                    for (const GapCellSummary& cell : sb.gap_summaries)
                        if (cell.kind == kind && cell.label == label && cell.summary)
                            rows.push_back(
                                box_of("n=" + std::to_string(sb.size), *cell.summary));
                if (rows.empty()) continue;
                std::string title = std::string(metric_name(kind)) + " gap (" + report.group_a +
                                    " - " + report.group_b + "), class " + label + " [" +
                                    vb.variant + "]";
                emit("boxplot_" + slug(vb.variant) + "_gap_" + slug(metric_name(kind)) + "_" +
                         slug(label) + ".svg",
                     boxplot_svg(title, "gap", rows));
            }

        // accuracy and per-class F1
        {
            std::vector<BoxRow> rows;
            for (const SizeBlock& sb : vb.sizes)
                if (sb.accuracy)
                    rows.push_back(box_of("n=" + std::to_string(sb.size), *sb.accuracy));
            if (!rows.empty())
                emit("boxplot_" + slug(vb.variant) + "_accuracy.svg",
                     boxplot_svg("Accuracy [" + vb.variant + "]", "accuracy", rows));
        }
        for (const std::string& label : report.filter.retained) {
            std::vector<BoxRow> rows;
            for (const SizeBlock& sb : vb.sizes)
                for (const auto& [l, summary] : sb.f1)
                    if (l == label && summary)
                        rows.push_back(box_of("n=" + std::to_string(sb.size), *summary));
            if (!rows.empty())
                emit("boxplot_" + slug(vb.variant) + "_f1_" + slug(label) + ".svg",
                     boxplot_svg("F1, class " + label + " [" + vb.variant + "]", "F1", rows));
        }

        // variance grid (sequential) and mean grid at largest size (diverging)
        {
            std::vector<std::string> cols;
            for (MetricKind kind : kAllMetricKinds)
                for (const SizeBlock& sb : vb.sizes)
                    cols.push_back(std::string(metric_name(kind)) + " " +
                                   std::to_string(sb.size));
            std::vector<std::vector<std::optional<double>>> grid;
            for (const std::string& label : report.filter.retained) {
                std::vector<std::optional<double>> row;
                for (MetricKind kind : kAllMetricKinds)
                    for (const SizeBlock& sb : vb.sizes) {
                        std::optional<double> v;
                        for (const GapCellSummary& cell : sb.gap_summaries)
                            if (cell.kind == kind && cell.label == label && cell.summary)
                                v = cell.summary->variance;
                        row.push_back(v);
                    }
                grid.push_back(std::move(row));
            }
            if (!grid.empty() && !cols.empty())
                emit("variance_table_" + slug(vb.variant) + ".svg",
                     heat_table_svg("Gap variance by class [" + vb.variant + "]",
                                    report.filter.retained, cols, grid, false));
        }
        if (!vb.sizes.empty()) {
            const SizeBlock& largest = vb.sizes.back();
            std::vector<std::string> cols;
            for (MetricKind kind : kAllMetricKinds) cols.push_back(metric_name(kind));
            std::vector<std::vector<std::optional<double>>> grid;
            for (const std::string& label : report.filter.retained) {
                std::vector<std::optional<double>> row;
                for (MetricKind kind : kAllMetricKinds) {
                    std::optional<double> v;
                    for (const GapCellSummary& cell : largest.gap_summaries)
                        if (cell.kind == kind && cell.label == label && cell.summary)
                            v = cell.summary->mean;
                    row.push_back(v);
                }
                grid.push_back(std::move(row));
            }
            if (!grid.empty())
                emit("mean_table_" + slug(vb.variant) + ".svg",
                     heat_table_svg("Mean gap by class, n=" + std::to_string(largest.size) +
                                        " [" + vb.variant + "]",
                                    report.filter.retained, cols, grid, true));
        }
    }

    return written;
}

}  // namespace fairgauge
