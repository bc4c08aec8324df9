#include "fairgauge/metrics.hpp"

#include <stdexcept>

namespace fairgauge {

namespace {

// One pass over the records; everything else is ratios of these counts.
// Only records with a prediction are tallied.
struct Tally {
    std::size_t n_groups = 0;
    std::size_t n_classes = 0;
    std::vector<std::int64_t> group_total;  // [g]: predicted records in group
    std::vector<std::int64_t> true_count;   // [g][y]: Y=y
    std::vector<std::int64_t> pred_count;   // [g][y]: Yhat=y
    std::vector<std::int64_t> tp_count;     // [g][y]: Yhat=Y=y
    std::int64_t predicted_records = 0;
    std::int64_t correct_records = 0;

    std::size_t cell(std::size_t g, std::size_t y) const { return g * n_classes + y; }
};

Tally tally(const AuditDataset& ds) {
    Tally t;
    t.n_groups = ds.groups().size();
    t.n_classes = ds.classes().size();
    t.group_total.assign(t.n_groups, 0);
    t.true_count.assign(t.n_groups * t.n_classes, 0);
    t.pred_count.assign(t.n_groups * t.n_classes, 0);
    t.tp_count.assign(t.n_groups * t.n_classes, 0);

    for (const Record& r : ds.records()) {
        if (!r.predicted_class) continue;
        auto g = ds.group_index(r.group);
        auto y = ds.class_index(r.true_class);
        auto yh = ds.class_index(*r.predicted_class);
        if (!g || !y || !yh) continue;  // vocabulary violations surface via validate()
        t.predicted_records += 1;
        t.group_total[*g] += 1;
        t.true_count[t.cell(*g, *y)] += 1;
        t.pred_count[t.cell(*g, *yh)] += 1;
        if (*y == *yh) {
            t.tp_count[t.cell(*g, *y)] += 1;
            t.correct_records += 1;
        }
    }
    return t;
}

std::size_t require_group(const AuditDataset& ds, const std::string& group) {
    auto g = ds.group_index(group);
    if (!g) throw std::invalid_argument("unknown group '" + group + "'");
    return *g;
}

std::size_t require_class(const AuditDataset& ds, const std::string& label) {
    auto y = ds.class_index(label);
    if (!y) throw std::invalid_argument("unknown class '" + label + "'");
    return *y;
}

MetricValue from_tally(const Tally& t, MetricKind kind, const AuditDataset& ds, std::size_t g,
                       std::size_t y) {
    MetricValue v;
    v.kind = kind;
    v.group = ds.groups()[g];
    v.label = ds.classes()[y];
    switch (kind) {
        case MetricKind::group_parity:
            v.numerator = t.pred_count[t.cell(g, y)];
            v.denominator = t.group_total[g];
            break;
        case MetricKind::true_positive_rate:
            v.numerator = t.tp_count[t.cell(g, y)];
            v.denominator = t.true_count[t.cell(g, y)];
            break;
        case MetricKind::predictive_parity:
            v.numerator = t.tp_count[t.cell(g, y)];
            v.denominator = t.pred_count[t.cell(g, y)];
            break;
    }
    return v;
}

std::int64_t support_of(const Tally& t, MetricKind kind, std::size_t g, std::size_t y) {
    return kind == MetricKind::group_parity ? t.pred_count[t.cell(g, y)]
                                            : t.tp_count[t.cell(g, y)];
}

GapValue gap_from_tally(const Tally& t, MetricKind kind, const AuditDataset& ds, std::size_t ga,
                        std::size_t gb, std::size_t y) {
    MetricValue a = from_tally(t, kind, ds, ga, y);
    MetricValue b = from_tally(t, kind, ds, gb, y);
    GapValue gap;
    gap.kind = kind;
    gap.group_a = a.group;
    gap.group_b = b.group;
    gap.label = a.label;
    gap.value_a = a.value();
    gap.value_b = b.value();
    if (a.defined() && b.defined()) gap.gap = *a.value() - *b.value();
    gap.support_a = support_of(t, kind, ga, y);
    gap.support_b = support_of(t, kind, gb, y);
    return gap;
}

}  // namespace

const char* metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::group_parity: return "GP";
        case MetricKind::true_positive_rate: return "TPR";
        case MetricKind::predictive_parity: return "PP";
    }
    return "?";
}

MetricValue group_parity(const AuditDataset& ds, const std::string& group,
                         const std::string& label) {
    return metric(MetricKind::group_parity, ds, group, label);
}

MetricValue true_positive_rate(const AuditDataset& ds, const std::string& group,
                               const std::string& label) {
    return metric(MetricKind::true_positive_rate, ds, group, label);
}

MetricValue predictive_parity(const AuditDataset& ds, const std::string& group,
                              const std::string& label) {
    return metric(MetricKind::predictive_parity, ds, group, label);
}

MetricValue metric(MetricKind kind, const AuditDataset& ds, const std::string& group,
                   const std::string& label) {
    std::size_t g = require_group(ds, group);
    std::size_t y = require_class(ds, label);
    return from_tally(tally(ds), kind, ds, g, y);
}

GapValue metric_gap(MetricKind kind, const AuditDataset& ds, const std::string& group_a,
                    const std::string& group_b, const std::string& label) {
    if (group_a == group_b)
        throw std::invalid_argument("gap requires two distinct groups, got '" + group_a + "'");
    std::size_t ga = require_group(ds, group_a);
    std::size_t gb = require_group(ds, group_b);
    std::size_t y = require_class(ds, label);
    return gap_from_tally(tally(ds), kind, ds, ga, gb, y);
}

SupportCounts support_counts(const AuditDataset& ds, const std::string& group,
                             const std::string& label) {
    std::size_t g = require_group(ds, group);
    std::size_t y = require_class(ds, label);
    Tally t = tally(ds);
    SupportCounts s;
    s.n_gp = t.pred_count[t.cell(g, y)];
    s.n_tpr = t.tp_count[t.cell(g, y)];
    s.n_pp = s.n_tpr;
    return s;
}

double accuracy(const AuditDataset& ds) {
    Tally t = tally(ds);
    if (t.predicted_records == 0)
        throw std::invalid_argument("accuracy: no record carries a prediction");
    return (double)t.correct_records / (double)t.predicted_records;
}

std::optional<double> f1_per_class(const AuditDataset& ds, const std::string& label) {
    std::size_t y = require_class(ds, label);
    Tally t = tally(ds);
    std::int64_t tp = 0, predicted = 0, truth = 0;
    for (std::size_t g = 0; g < t.n_groups; ++g) {
        tp += t.tp_count[t.cell(g, y)];
        predicted += t.pred_count[t.cell(g, y)];
        truth += t.true_count[t.cell(g, y)];
    }
    if (predicted == 0 || truth == 0) return std::nullopt;
    double precision = (double)tp / (double)predicted;
    double recall = (double)tp / (double)truth;
    if (precision + recall == 0.0) return std::nullopt;  // tp == 0 on both sides
    return 2.0 * precision * recall / (precision + recall);
}

const GapValue& GapTable::at(MetricKind kind, const std::string& label) const {
    for (const GapValue& g : gaps)
        if (g.kind == kind && g.label == label) return g;
    throw std::invalid_argument("gap table has no row (" + std::string(metric_name(kind)) + ", " +
                                label + ")");
}

GapTable gap_table(const AuditDataset& ds, const std::string& group_a,
                   const std::string& group_b) {
    if (group_a == group_b)
        throw std::invalid_argument("gap table requires two distinct groups");
    std::size_t ga = require_group(ds, group_a);
    std::size_t gb = require_group(ds, group_b);
    Tally t = tally(ds);

    GapTable table;
    table.group_a = group_a;
    table.group_b = group_b;
    table.classes = ds.classes();
    for (MetricKind kind : kAllMetricKinds)
        for (std::size_t y = 0; y < table.classes.size(); ++y)
            table.gaps.push_back(gap_from_tally(t, kind, ds, ga, gb, y));
    for (std::size_t g : {ga, gb})
        for (std::size_t y = 0; y < table.classes.size(); ++y) {
            SupportCounts s;
            s.n_gp = t.pred_count[t.cell(g, y)];
            s.n_tpr = t.tp_count[t.cell(g, y)];
            s.n_pp = s.n_tpr;
            table.supports.push_back({ds.groups()[g], table.classes[y], s});
        }
    return table;
}

}  // namespace fairgauge
