#pragma once

#include <string>
#include <vector>

#include "fairgauge/stats.hpp"

namespace fairgauge {

/// Canonical float formatting: normalized through "%.12g" so serialized
/// reports are byte-identical at 12 significant digits.
double canonical_float(double v);
std::string format_float(double v);

/// Canonical report JSON (sorted keys, normalized floats).
std::string report_to_json(const SummaryReport& report);
void write_report_json(const SummaryReport& report, const std::string& path);

/// Inverse of report_to_json; throws std::runtime_error on malformed input.
SummaryReport read_report_json(const std::string& path);

/// CSV table exports, one file per table:
///   gap_summaries.csv   - every (variant, size, metric, class) Summary
///   variance_table.csv  - classes x (metric, size) variance grid
///   mean_table.csv      - classes x (metric, variant) mean grid at the
///                         largest size
///   performance.csv     - accuracy and per-class F1 summaries
///   ttests.csv          - all pairwise comparisons
/// Returns the paths written.
std::vector<std::string> write_report_csvs(const SummaryReport& report,
                                           const std::string& out_dir);

}  // namespace fairgauge
