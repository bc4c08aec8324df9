#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgauge/dataset.hpp"
#include "fairgauge/metrics.hpp"

namespace fairgauge {

/// Generative law for a synthetic population: group weights, per-group
/// class prevalences p(y|g), and per-group confusion rows c_g(yhat|y) (the
/// probability the memoryless predictor outputs yhat given true y). Every
/// distribution must sum to 1 within 1e-12.
struct PopulationSpec {
    std::string name;
    std::vector<std::string> groups;
    std::vector<double> group_weights;            // per group
    std::vector<std::string> classes;
    std::vector<std::vector<double>> prevalence;  // [group][class] = p(y|g)
    std::vector<std::vector<std::vector<double>>> confusion;  // [group][true y][pred yhat]

    std::size_t group_count() const { return groups.size(); }
    std::size_t class_count() const { return classes.size(); }
};

/// Throws std::invalid_argument naming the exact offending entry.
void check_population_spec(const PopulationSpec& spec);

/// JSON spec file: {name, groups:[{label, weight}], classes:[...],
/// prevalence:{g:[...]}, confusion:{g:[[...]]}}.
PopulationSpec load_population_spec(const std::string& path);
void write_population_spec(const PopulationSpec& spec, const std::string& path);

/// Closed-form metric values under the spec's law:
///   GP(g,y)  = sum_y' p(y'|g) c_g(y|y')
///   TPR(g,y) = c_g(y|y)
///   PP(g,y)  = p(y|g) c_g(y|y) / GP(g,y), UNDEFINED where GP(g,y) = 0.
struct TrueMetricCell {
    std::string group;
    std::string label;
    double gp = 0.0;
    double tpr = 0.0;
    std::optional<double> pp;
};

struct TrueGap {
    MetricKind kind{};
    std::string group_a;
    std::string group_b;
    std::string label;
    std::optional<double> gap;
};

struct TrueMetrics {
    std::vector<TrueMetricCell> cells;  // group-major, class order
    std::vector<TrueGap> gaps;          // all ordered group pairs

    const TrueMetricCell& at(const std::string& group, const std::string& label) const;
};

TrueMetrics true_metrics(const PopulationSpec& spec);

/// n records drawn i.i.d. from the law (group, then true class, then
/// predicted class); deterministic under seed. Records carry no text.
AuditDataset generate(const PopulationSpec& spec, std::int64_t n, std::uint64_t seed);

/// Bundled scenario: a rare, strongly imbalanced class (0.5% prevalence,
/// 15% female share), a common balanced class (10% prevalence, 49.5%
/// female share), and a remainder class. The confusion rows are calibrated
/// so the rare class's TPR/PP estimators land in the unstable small-count
/// regime at modest sample sizes while GP stays well supported.
PopulationSpec surgeon_scenario();

}  // namespace fairgauge
