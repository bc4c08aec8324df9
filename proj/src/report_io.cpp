#include "fairgauge/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace fairgauge {

namespace {

using nlohmann::json;

json summary_to_json(const Summary& s) {
    json j;
    j["count"] = s.count;
    j["undefined_count"] = s.undefined_count;
    j["mean"] = canonical_float(s.mean);
    if (s.variance)
        j["variance"] = canonical_float(*s.variance);
    else
        j["variance"] = nullptr;
    j["min"] = canonical_float(s.min);
    j["q1"] = canonical_float(s.q1);
    j["median"] = canonical_float(s.median);
    j["q3"] = canonical_float(s.q3);
    j["max"] = canonical_float(s.max);
    return j;
}

Summary summary_from_json(const json& j) {
    Summary s;
    s.count = j.at("count");
    s.undefined_count = j.at("undefined_count");
    s.mean = j.at("mean");
    if (!j.at("variance").is_null()) s.variance = j.at("variance").get<double>();
    s.min = j.at("min");
    s.q1 = j.at("q1");
    s.median = j.at("median");
    s.q3 = j.at("q3");
    s.max = j.at("max");
    return s;
}

json ttest_to_json(const ComparisonTest& ct) {
    json j;
    j["quantity"] = ct.quantity;
    j["variant_a"] = ct.variant_a;
    j["variant_b"] = ct.variant_b;
    j["size_a"] = ct.size_a;
    j["size_b"] = ct.size_b;
    j["n_a"] = ct.n_a;
    j["n_b"] = ct.n_b;
    // nlohmann serializes non-finite doubles as null; keep the sign instead
    if (std::isfinite(ct.test.t_statistic))
        j["t"] = canonical_float(ct.test.t_statistic);
    else
        j["t"] = ct.test.t_statistic > 0 ? "inf" : "-inf";
    j["df"] = canonical_float(ct.test.degrees_of_freedom);
    j["p_value"] = canonical_float(ct.test.p_value);
    j["significant"] = ct.test.significant;
    j["degenerate"] = ct.test.degenerate;
    return j;
}

ComparisonTest ttest_from_json(const json& j, double alpha) {
    ComparisonTest ct;
    ct.quantity = j.at("quantity");
    ct.variant_a = j.at("variant_a");
    ct.variant_b = j.at("variant_b");
    ct.size_a = j.at("size_a");
    ct.size_b = j.at("size_b");
    ct.n_a = j.at("n_a");
    ct.n_b = j.at("n_b");
    if (j.at("t").is_string())
        ct.test.t_statistic = j.at("t") == "inf" ? std::numeric_limits<double>::infinity()
                                                 : -std::numeric_limits<double>::infinity();
    else
        ct.test.t_statistic = j.at("t");
    ct.test.degrees_of_freedom = j.at("df");
    ct.test.p_value = j.at("p_value");
    ct.test.significant = j.at("significant");
    ct.test.degenerate = j.at("degenerate");
    ct.test.alpha = alpha;
    return ct;
}

MetricKind kind_from_name(const std::string& name) {
    for (MetricKind kind : kAllMetricKinds)
        if (name == metric_name(kind)) return kind;
    throw std::runtime_error("unknown metric kind '" + name + "'");
}

}  // namespace

double canonical_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string report_to_json(const SummaryReport& report) {
    json doc;
    doc["group_a"] = report.group_a;
    doc["group_b"] = report.group_b;
    doc["alpha"] = canonical_float(report.alpha);
    doc["test_variant"] =
        report.test_variant == TTestVariant::student_pooled ? "student_pooled" : "welch";
    doc["filter_min_predictions"] = report.filter_min_predictions;
    doc["classes"] = report.classes;
    doc["retained_classes"] = report.filter.retained;
    doc["excluded_classes"] = json::array();
    for (const auto& e : report.filter.excluded)
        doc["excluded_classes"].push_back({{"class", e.label}, {"reason", e.reason}});

    doc["variants"] = json::array();
    for (const VariantBlock& vb : report.variants) {
        json jv;
        jv["variant"] = vb.variant;
        jv["sizes"] = json::array();
        for (const SizeBlock& sb : vb.sizes) {
            json js;
            js["size"] = sb.size;
            js["replicate_count"] = sb.replicate_count;
            js["gap_summaries"] = json::array();
            for (const GapCellSummary& cell : sb.gap_summaries) {
                json jc;
                jc["metric"] = metric_name(cell.kind);
                jc["class"] = cell.label;
                jc["replicate_count"] = cell.replicate_count;
                jc["undefined_count"] = cell.undefined_count;
                jc["summary"] = cell.summary ? summary_to_json(*cell.summary) : json(nullptr);
                js["gap_summaries"].push_back(std::move(jc));
            }
            js["accuracy"] = sb.accuracy ? summary_to_json(*sb.accuracy) : json(nullptr);
            js["f1"] = json::array();
            for (const auto& [label, summary] : sb.f1)
                js["f1"].push_back({{"class", label},
                                    {"summary", summary ? summary_to_json(*summary)
                                                        : json(nullptr)}});
            jv["sizes"].push_back(std::move(js));
        }
        doc["variants"].push_back(std::move(jv));
    }

    doc["size_ttests"] = json::array();
    for (const ComparisonTest& ct : report.size_tests) doc["size_ttests"].push_back(ttest_to_json(ct));
    doc["variant_ttests"] = json::array();
    for (const ComparisonTest& ct : report.variant_tests)
        doc["variant_ttests"].push_back(ttest_to_json(ct));

    return doc.dump(2) + "\n";
}

void write_report_json(const SummaryReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << report_to_json(report);
}

SummaryReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("report '" + path + "': " + e.what());
    }
    try {
        SummaryReport report;
        report.group_a = doc.at("group_a");
        report.group_b = doc.at("group_b");
        report.alpha = doc.at("alpha");
        report.test_variant = doc.at("test_variant") == "welch" ? TTestVariant::welch
                                                                : TTestVariant::student_pooled;
        report.filter_min_predictions = doc.at("filter_min_predictions");
        report.classes = doc.at("classes").get<std::vector<std::string>>();
        report.filter.retained = doc.at("retained_classes").get<std::vector<std::string>>();
        for (const auto& e : doc.at("excluded_classes"))
            report.filter.excluded.push_back({e.at("class"), e.at("reason")});

        for (const auto& jv : doc.at("variants")) {
            VariantBlock vb;
            vb.variant = jv.at("variant");
            for (const auto& js : jv.at("sizes")) {
                SizeBlock sb;
                sb.size = js.at("size");
                sb.replicate_count = js.at("replicate_count");
                for (const auto& jc : js.at("gap_summaries")) {
                    GapCellSummary cell;
                    cell.kind = kind_from_name(jc.at("metric"));
                    cell.label = jc.at("class");
                    cell.replicate_count = jc.at("replicate_count");
                    cell.undefined_count = jc.at("undefined_count");
                    if (!jc.at("summary").is_null())
                        cell.summary = summary_from_json(jc.at("summary"));
                    sb.gap_summaries.push_back(std::move(cell));
                }
                if (!js.at("accuracy").is_null())
                    sb.accuracy = summary_from_json(js.at("accuracy"));
                for (const auto& jf : js.at("f1")) {
                    std::optional<Summary> s;
                    if (!jf.at("summary").is_null()) s = summary_from_json(jf.at("summary"));
                    sb.f1.emplace_back(jf.at("class").get<std::string>(), std::move(s));
                }
                vb.sizes.push_back(std::move(sb));
            }
            report.variants.push_back(std::move(vb));
        }
        for (const auto& jt : doc.at("size_ttests"))
            report.size_tests.push_back(ttest_from_json(jt, report.alpha));
        for (const auto& jt : doc.at("variant_ttests"))
            report.variant_tests.push_back(ttest_from_json(jt, report.alpha));
        return report;
    } catch (const json::exception& e) {
        throw std::runtime_error("report '" + path + "': " + e.what());
    }
}

namespace {

std::string csv_quote(const std::string& s) {
    bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_float(*v) : "";
}

}  // namespace

std::vector<std::string> write_report_csvs(const SummaryReport& report,
                                           const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto open = [&](const std::string& name) {
        fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        written.push_back(p.string());
        return out;
    };

    {
        auto out = open("gap_summaries.csv");
        out << "variant,size,metric,class,replicates,undefined,mean,variance,min,q1,median,q3,max\n";
        for (const VariantBlock& vb : report.variants)
            for (const SizeBlock& sb : vb.sizes)
                for (const GapCellSummary& cell : sb.gap_summaries) {
                    out << csv_quote(vb.variant) << ',' << sb.size << ','
                        << metric_name(cell.kind) << ',' << csv_quote(cell.label) << ','
                        << cell.replicate_count << ',' << cell.undefined_count;
                    if (cell.summary) {
                        const Summary& s = *cell.summary;
                        out << ',' << format_float(s.mean) << ',' << opt_cell(s.variance) << ','
                            << format_float(s.min) << ',' << format_float(s.q1) << ','
                            << format_float(s.median) << ',' << format_float(s.q3) << ','
                            << format_float(s.max);
                    } else {
                        out << ",,,,,,,";
                    }
                    out << '\n';
                }
    }

    {
        // figure-5 analog: per class, variance of each metric gap at each size
        auto out = open("variance_table.csv");
        out << "variant,class";
        std::vector<std::pair<MetricKind, std::int64_t>> columns;
        if (!report.variants.empty())
            for (MetricKind kind : kAllMetricKinds)
                for (const SizeBlock& sb : report.variants.front().sizes) {
                    columns.push_back({kind, sb.size});
                    out << ',' << metric_name(kind) << '_' << sb.size;
                }
        out << '\n';
        for (const VariantBlock& vb : report.variants)
            for (const std::string& label : report.filter.retained) {
                out << csv_quote(vb.variant) << ',' << csv_quote(label);
                for (const auto& [kind, size] : columns) {
                    std::optional<double> var;
                    for (const SizeBlock& sb : vb.sizes) {
                        if (sb.size != size) continue;
                        for (const GapCellSummary& cell : sb.gap_summaries)
                            if (cell.kind == kind && cell.label == label && cell.summary)
                                var = cell.summary->variance;
                    }
                    out << ',' << opt_cell(var);
                }
                out << '\n';
            }
    }

    {
        // figure-6 analog: per class, mean gap per metric per variant at the
        // largest size
        auto out = open("mean_table.csv");
        out << "class";
        for (const VariantBlock& vb : report.variants)
            for (MetricKind kind : kAllMetricKinds)
                out << ',' << csv_quote(vb.variant) << '_' << metric_name(kind);
        out << '\n';
        for (const std::string& label : report.filter.retained) {
            out << csv_quote(label);
            for (const VariantBlock& vb : report.variants) {
                const SizeBlock* largest =
                    vb.sizes.empty() ? nullptr : &vb.sizes.back();
                for (MetricKind kind : kAllMetricKinds) {
                    std::optional<double> mean;
                    if (largest)
                        for (const GapCellSummary& cell : largest->gap_summaries)
                            if (cell.kind == kind && cell.label == label && cell.summary)
                                mean = cell.summary->mean;
                    out << ',' << opt_cell(mean);
                }
            }
            out << '\n';
        }
    }

    {
        auto out = open("performance.csv");
        out << "variant,size,quantity,replicates,undefined,mean,variance,min,q1,median,q3,max\n";
        auto row = [&](const std::string& variant, std::int64_t size, const std::string& quantity,
                       const std::optional<Summary>& s, std::int64_t replicates) {
            out << csv_quote(variant) << ',' << size << ',' << csv_quote(quantity) << ',';
            if (s) {
                out << s->count + s->undefined_count << ',' << s->undefined_count << ','
                    << format_float(s->mean) << ',' << opt_cell(s->variance) << ','
                    << format_float(s->min) << ',' << format_float(s->q1) << ','
                    << format_float(s->median) << ',' << format_float(s->q3) << ','
                    << format_float(s->max);
            } else {
                out << replicates << ',' << replicates << ",,,,,,,";
            }
            out << '\n';
        };
        for (const VariantBlock& vb : report.variants)
            for (const SizeBlock& sb : vb.sizes) {
                row(vb.variant, sb.size, "accuracy", sb.accuracy, sb.replicate_count);
                for (const auto& [label, summary] : sb.f1)
                    row(vb.variant, sb.size, "f1:" + label, summary, sb.replicate_count);
            }
    }

    {
        auto out = open("ttests.csv");
        out << "kind,quantity,variant_a,variant_b,size_a,size_b,n_a,n_b,t,df,p_value,"
               "significant,degenerate\n";
        auto row = [&](const char* kind, const ComparisonTest& ct) {
            out << kind << ',' << csv_quote(ct.quantity) << ',' << csv_quote(ct.variant_a) << ','
                << csv_quote(ct.variant_b) << ',' << ct.size_a << ',' << ct.size_b << ','
                << ct.n_a << ',' << ct.n_b << ',' << format_float(ct.test.t_statistic) << ','
                << format_float(ct.test.degrees_of_freedom) << ','
                << format_float(ct.test.p_value) << ',' << (ct.test.significant ? 1 : 0) << ','
                << (ct.test.degenerate ? 1 : 0) << '\n';
        };
        for (const ComparisonTest& ct : report.size_tests) row("size", ct);
        for (const ComparisonTest& ct : report.variant_tests) row("variant", ct);
    }

    return written;
}

}  // namespace fairgauge
