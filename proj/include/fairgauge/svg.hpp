#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairgauge/stats.hpp"

namespace fairgauge {

/// One labeled five-number box in a boxplot.
struct BoxRow {
    std::string label;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Boxplot of five-number summaries on a linear scale: the horizontal axis
/// maps [lo, hi] (the whisker extremes across all rows) onto
/// [kPlotLeft, kPlotLeft + kPlotWidth]. Geometry is a pure function of the
/// rows, so identical input renders byte-identical SVG.
std::string boxplot_svg(const std::string& title, const std::string& axis_label,
                        const std::vector<BoxRow>& rows);

// boxplot layout constants (documented linear scale)
inline constexpr double kPlotLeft = 160.0;
inline constexpr double kPlotWidth = 600.0;
inline constexpr double kRowHeight = 44.0;
inline constexpr double kHeaderHeight = 60.0;
inline constexpr double kFooterHeight = 50.0;

/// Heat table: rows x columns grid of optional values; empty cells are
/// hatched. `diverging` colors around zero (blue negative, red positive),
/// otherwise a sequential green ramp scaled to the maximum.
std::string heat_table_svg(const std::string& title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<std::optional<double>>>& values,
                           bool diverging);

/// Emits every figure for a report into out_dir:
///   boxplot_<variant>_gap_<metric>_<class>.svg  (one box per size)
///   boxplot_<variant>_accuracy.svg
///   boxplot_<variant>_f1_<class>.svg
///   variance_table_<variant>.svg
///   mean_table_<variant>.svg
/// Returns the paths written, in a deterministic order.
std::vector<std::string> render_report(const SummaryReport& report, const std::string& out_dir);

}  // namespace fairgauge
