#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgauge/dataset.hpp"

namespace fairgauge {

enum class MetricKind { group_parity, true_positive_rate, predictive_parity };

inline constexpr MetricKind kAllMetricKinds[] = {
    MetricKind::group_parity, MetricKind::true_positive_rate, MetricKind::predictive_parity};

const char* metric_name(MetricKind kind);  // "GP" / "TPR" / "PP"

/// A conditional-probability estimate kept as exact integer counts; the
/// ratio is formed once, at the end. UNDEFINED (empty denominator) is a
/// first-class state, never silently 0.
struct MetricValue {
    MetricKind kind{};
    std::string group;
    std::string label;
    std::int64_t numerator = 0;
    std::int64_t denominator = 0;

    bool defined() const { return denominator > 0; }
    std::optional<double> value() const {
        if (!defined()) return std::nullopt;
        return (double)numerator / (double)denominator;
    }
};

/// Difference of one metric between an ordered group pair for one class.
/// supports carry the estimator's numerator-intersection count on each side
/// (n_GP for GP rows, n_TPR = n_PP for the others).
struct GapValue {
    MetricKind kind{};
    std::string group_a;
    std::string group_b;
    std::string label;
    std::optional<double> value_a;  // metric on each side, when defined
    std::optional<double> value_b;
    std::optional<double> gap;
    std::int64_t support_a = 0;
    std::int64_t support_b = 0;
};

/// Numerator-intersection counts for one (group, class) cell: how many
/// individuals each estimator actually uses. n_tpr == n_pp <= n_gp always.
struct SupportCounts {
    std::int64_t n_gp = 0;
    std::int64_t n_tpr = 0;
    std::int64_t n_pp = 0;
};

/// All gaps for one ordered group pair: one row per (metric kind, class),
/// plus the per-(group, class) support counts the class filters need.
struct GapTable {
    std::string group_a;
    std::string group_b;
    std::vector<std::string> classes;
    std::vector<GapValue> gaps;  // kind-major, class order

    struct SupportRow {
        std::string group;
        std::string label;
        SupportCounts counts;
    };
    std::vector<SupportRow> supports;  // both groups x all classes

    const GapValue& at(MetricKind kind, const std::string& label) const;
};

// Records without a prediction are excluded from numerators and
// denominators alike, so sum_y GP(g, y) = 1 for any group with at least one
// predicted record. All operations throw std::invalid_argument on labels
// outside the vocabularies.

MetricValue group_parity(const AuditDataset& ds, const std::string& group,
                         const std::string& label);
MetricValue true_positive_rate(const AuditDataset& ds, const std::string& group,
                               const std::string& label);
MetricValue predictive_parity(const AuditDataset& ds, const std::string& group,
                              const std::string& label);
MetricValue metric(MetricKind kind, const AuditDataset& ds, const std::string& group,
                   const std::string& label);

/// gap = metric(group_a) - metric(group_b); UNDEFINED if either side is.
/// Throws if the groups are identical.
GapValue metric_gap(MetricKind kind, const AuditDataset& ds, const std::string& group_a,
                    const std::string& group_b, const std::string& label);

SupportCounts support_counts(const AuditDataset& ds, const std::string& group,
                             const std::string& label);

/// Fraction of predicted records with predicted == true class.
/// Throws std::invalid_argument when no record carries a prediction.
double accuracy(const AuditDataset& ds);

/// One-vs-rest F1 for one class (harmonic mean of precision and recall over
/// predicted records, both groups pooled); UNDEFINED when precision and
/// recall cannot both be formed or are both zero.
std::optional<double> f1_per_class(const AuditDataset& ds, const std::string& label);

/// Every metric's gap for every class, one pass over the dataset.
GapTable gap_table(const AuditDataset& ds, const std::string& group_a,
                   const std::string& group_b);

}  // namespace fairgauge
