#include "fairgauge/synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fairgauge/rng.hpp"

namespace fairgauge {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_distribution(const std::vector<double>& dist, const std::string& where) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (!(dist[i] >= 0.0 && dist[i] <= 1.0))
            throw std::invalid_argument(where + "[" + std::to_string(i) +
                                        "]: probability outside [0,1]");
        sum += dist[i];
    }
    if (std::fabs(sum - 1.0) > kSumTolerance)
        throw std::invalid_argument(where + ": sums to " + std::to_string(sum) + ", expected 1");
}

// CDF inversion; the final category absorbs any residual mass so rounding
// can never fall off the end.
std::size_t draw_categorical(const std::vector<double>& dist, SplitMix64& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return i;
    }
    return dist.size() - 1;
}

}  // namespace

void check_population_spec(const PopulationSpec& spec) {
    std::size_t ng = spec.group_count(), nc = spec.class_count();
    if (ng == 0) throw std::invalid_argument("population spec: no groups");
    if (nc == 0) throw std::invalid_argument("population spec: no classes");
    if (spec.group_weights.size() != ng)
        throw std::invalid_argument("population spec: group_weights size mismatch");
    check_distribution(spec.group_weights, "group_weights");
    if (spec.prevalence.size() != ng)
        throw std::invalid_argument("population spec: prevalence needs one row per group");
    if (spec.confusion.size() != ng)
        throw std::invalid_argument("population spec: confusion needs one matrix per group");
    for (std::size_t g = 0; g < ng; ++g) {
        if (spec.prevalence[g].size() != nc)
            throw std::invalid_argument("prevalence." + spec.groups[g] + ": expected " +
                                        std::to_string(nc) + " entries");
        check_distribution(spec.prevalence[g], "prevalence." + spec.groups[g]);
        if (spec.confusion[g].size() != nc)
            throw std::invalid_argument("confusion." + spec.groups[g] + ": expected " +
                                        std::to_string(nc) + " rows");
        for (std::size_t y = 0; y < nc; ++y) {
            if (spec.confusion[g][y].size() != nc)
                throw std::invalid_argument("confusion." + spec.groups[g] + "[" +
                                            std::to_string(y) + "]: expected " +
                                            std::to_string(nc) + " entries");
            check_distribution(spec.confusion[g][y],
                               "confusion." + spec.groups[g] + "[" + std::to_string(y) + "]");
        }
    }
}

PopulationSpec load_population_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open population spec '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("population spec '" + path + "': " + e.what());
    }

    PopulationSpec spec;
    try {
        spec.name = doc.value("name", "population");
        for (const auto& g : doc.at("groups")) {
            spec.groups.push_back(g.at("label").get<std::string>());
            spec.group_weights.push_back(g.at("weight").get<double>());
        }
        for (const auto& c : doc.at("classes")) spec.classes.push_back(c.get<std::string>());
        for (const std::string& g : spec.groups) {
            spec.prevalence.push_back(doc.at("prevalence").at(g).get<std::vector<double>>());
            spec.confusion.push_back(
                doc.at("confusion").at(g).get<std::vector<std::vector<double>>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("population spec '" + path + "': " + e.what());
    }
    try {
        check_population_spec(spec);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("population spec '" + path + "': " + e.what());
    }
    return spec;
}

void write_population_spec(const PopulationSpec& spec, const std::string& path) {
    nlohmann::json doc;
    doc["name"] = spec.name;
    doc["groups"] = nlohmann::json::array();
    for (std::size_t g = 0; g < spec.group_count(); ++g)
        doc["groups"].push_back({{"label", spec.groups[g]}, {"weight", spec.group_weights[g]}});
    doc["classes"] = spec.classes;
    for (std::size_t g = 0; g < spec.group_count(); ++g) {
        doc["prevalence"][spec.groups[g]] = spec.prevalence[g];
        doc["confusion"][spec.groups[g]] = spec.confusion[g];
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

const TrueMetricCell& TrueMetrics::at(const std::string& group, const std::string& label) const {
    for (const TrueMetricCell& c : cells)
        if (c.group == group && c.label == label) return c;
    throw std::invalid_argument("no true-metric cell (" + group + ", " + label + ")");
}

TrueMetrics true_metrics(const PopulationSpec& spec) {
    check_population_spec(spec);
    std::size_t ng = spec.group_count(), nc = spec.class_count();

    TrueMetrics tm;
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t y = 0; y < nc; ++y) {
            TrueMetricCell cell;
            cell.group = spec.groups[g];
            cell.label = spec.classes[y];
            double gp = 0.0;
            for (std::size_t yt = 0; yt < nc; ++yt)
                gp += spec.prevalence[g][yt] * spec.confusion[g][yt][y];
            cell.gp = gp;
            cell.tpr = spec.confusion[g][y][y];
            if (gp > 0.0) cell.pp = spec.prevalence[g][y] * spec.confusion[g][y][y] / gp;
            tm.cells.push_back(std::move(cell));
        }

    for (std::size_t ga = 0; ga < ng; ++ga)
        for (std::size_t gb = 0; gb < ng; ++gb) {
            if (ga == gb) continue;
            for (std::size_t y = 0; y < nc; ++y) {
                const TrueMetricCell& a = tm.cells[ga * nc + y];
                const TrueMetricCell& b = tm.cells[gb * nc + y];
                for (MetricKind kind : kAllMetricKinds) {
                    TrueGap gap;
                    gap.kind = kind;
                    gap.group_a = spec.groups[ga];
                    gap.group_b = spec.groups[gb];
                    gap.label = spec.classes[y];
                    switch (kind) {
                        case MetricKind::group_parity: gap.gap = a.gp - b.gp; break;
                        case MetricKind::true_positive_rate: gap.gap = a.tpr - b.tpr; break;
                        case MetricKind::predictive_parity:
                            if (a.pp && b.pp) gap.gap = *a.pp - *b.pp;
                            break;
                    }
                    tm.gaps.push_back(std::move(gap));
                }
            }
        }
    return tm;
}

AuditDataset generate(const PopulationSpec& spec, std::int64_t n, std::uint64_t seed) {
    check_population_spec(spec);
    if (n < 1) throw std::invalid_argument("generate: n must be >= 1");

    SplitMix64 rng(seed);
    std::vector<Record> records;
    records.reserve((std::size_t)n);
    char id[24];
    for (std::int64_t i = 0; i < n; ++i) {
        std::size_t g = draw_categorical(spec.group_weights, rng);
        std::size_t y = draw_categorical(spec.prevalence[g], rng);
        std::size_t yh = draw_categorical(spec.confusion[g][y], rng);
        std::snprintf(id, sizeof id, "s%08lld", (long long)i);
        Record r;
        r.id = id;
        r.group = spec.groups[g];
        r.true_class = spec.classes[y];
        r.predicted_class = spec.classes[yh];
        records.push_back(std::move(r));
    }
    return AuditDataset::with_vocabularies(spec.name, std::move(records), spec.groups,
                                           spec.classes);
}

PopulationSpec surgeon_scenario() {
    PopulationSpec spec;
    spec.name = "surgeon_scenario";
    spec.groups = {"M", "F"};
    spec.group_weights = {0.5, 0.5};
    spec.classes = {"surgeon", "physician", "other"};
    // Overall prevalence: surgeon 0.5% with a 15% female share, physician
    // 10% with a 49.5% female share, remainder "other".
    spec.prevalence = {
        {0.0085, 0.101, 0.8905},   // M
        {0.0015, 0.099, 0.8995},   // F
    };
    spec.confusion = {
        // M: rows true surgeon / physician / other
        {{0.72, 0.10, 0.18}, {0.004, 0.85, 0.146}, {0.0008, 0.03, 0.9692}},
        // F
        {{0.45, 0.20, 0.35}, {0.001, 0.87, 0.129}, {0.0002, 0.035, 0.9648}},
    };
    check_population_spec(spec);
    return spec;
}

}  // namespace fairgauge
