#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairgauge/metrics.hpp"

namespace fairgauge {

/// Distributional summary of the defined observations in a sample;
/// undefined entries are excluded from the moments but always counted.
struct Summary {
    std::int64_t count = 0;            // defined observations
    std::int64_t undefined_count = 0;
    double mean = 0.0;
    std::optional<double> variance;    // unbiased (n-1); absent when count < 2
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Moments over the defined values; quartiles by linear interpolation
/// between order statistics (h = (n-1)p; the median of an even-sized sample
/// is the midpoint of the central pair). Throws std::invalid_argument when
/// no value is defined.
Summary summarize(std::span<const std::optional<double>> values);
Summary summarize(std::span<const double> values);

enum class TTestVariant { student_pooled, welch };

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool significant = false;    // p_value < alpha
    bool degenerate = false;     // both samples constant
};

/// Two-sample two-sided test. student_pooled uses the pooled variance with
/// df = |a|+|b|-2; welch uses the Welch-Satterthwaite df. Degenerate input
/// (both samples constant) yields t=0, p=1 when equal and p=0 when not,
/// flagged. Throws when either sample has fewer than 2 observations.
TTestResult t_test(std::span<const double> a, std::span<const double> b,
                   TTestVariant variant = TTestVariant::student_pooled, double alpha = 0.05);

/// Regularized incomplete beta I_x(a, b); continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T_df| >= |t|) of Student's t distribution.
double student_t_two_sided_p(double t, double df);

/// Class retention rule: keep a class only when every replicate has
/// strictly more than min_predictions predicted records for each group of
/// the audited pair. min_predictions = 0 is the "at least one prediction
/// per group in all replicates" rule.
struct ClassFilter {
    std::int64_t min_predictions = 0;

    static ClassFilter any_prediction() { return {0}; }
    static ClassFilter min_predictions_per_group(std::int64_t k) { return {k}; }
};

/// Everything build_report needs from one replicate.
struct ReplicateResult {
    std::string variant = "base";  // dataset variant label
    std::int64_t size = 0;
    int index = 0;
    std::uint64_t seed = 0;
    GapTable gaps;
    std::optional<double> accuracy;
    std::vector<std::pair<std::string, std::optional<double>>> f1;  // per class
};

struct ClassExclusion {
    std::string label;
    std::string reason;
};

struct FilterOutcome {
    std::vector<std::string> retained;       // class vocabulary order
    std::vector<ClassExclusion> excluded;
};

/// Applies the rule across all replicates; exclusion reasons name the first
/// offending (variant, size, replicate, group, count).
FilterOutcome filter_classes(std::span<const ReplicateResult> results, const ClassFilter& rule);

/// One aggregated cell: absent summary means every replicate was UNDEFINED.
struct GapCellSummary {
    MetricKind kind{};
    std::string label;
    std::optional<Summary> summary;
    std::int64_t undefined_count = 0;
    std::int64_t replicate_count = 0;
};

struct SizeBlock {
    std::int64_t size = 0;
    std::int64_t replicate_count = 0;
    std::vector<GapCellSummary> gap_summaries;                       // retained classes only
    std::optional<Summary> accuracy;
    std::vector<std::pair<std::string, std::optional<Summary>>> f1;  // retained classes
};

struct VariantBlock {
    std::string variant;
    std::vector<SizeBlock> sizes;
};

/// One pairwise comparison; quantity is "gap:GP:<class>", "accuracy" or
/// "f1:<class>".
struct ComparisonTest {
    std::string quantity;
    std::string variant_a;
    std::string variant_b;
    std::int64_t size_a = 0;
    std::int64_t size_b = 0;
    std::int64_t n_a = 0;
    std::int64_t n_b = 0;
    TTestResult test;
};

struct SummaryReport {
    std::string group_a;
    std::string group_b;
    double alpha = 0.05;
    TTestVariant test_variant = TTestVariant::student_pooled;
    std::int64_t filter_min_predictions = 0;
    std::vector<std::string> classes;  // full vocabulary
    FilterOutcome filter;
    std::vector<VariantBlock> variants;
    std::vector<ComparisonTest> size_tests;     // same variant, distinct sizes
    std::vector<ComparisonTest> variant_tests;  // same size, distinct variants
};

/// Aggregates replicate results into the per-size summaries and runs the
/// pairwise t-tests (each size pair within a variant, each variant pair
/// within a size; gaps, accuracy and F1 each labeled). Deterministic:
/// identical inputs yield identical reports. Tests are emitted only where
/// both sides have >= 2 defined observations.
SummaryReport build_report(std::span<const ReplicateResult> results, double alpha,
                           const ClassFilter& rule,
                           TTestVariant variant = TTestVariant::student_pooled);

/// Reduces one finished replicate to the numbers the report needs.
ReplicateResult evaluate_replicate(const AuditDataset& test, const std::string& group_a,
                                   const std::string& group_b, const std::string& variant,
                                   std::int64_t size, int index, std::uint64_t seed);

}  // namespace fairgauge
