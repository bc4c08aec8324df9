// fairgauge: group-fairness audit toolkit CLI.
//
// Subcommands: audit, plan, debias, simulate, render. Exit codes:
//   0 success
//   1 I/O or schema error
//   2 validation failure (dataset lacks what the command needs, bad spec)
//   3 predictor failure (plan only; replicate coordinates printed)

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairgauge/dataset.hpp"
#include "fairgauge/debias.hpp"
#include "fairgauge/manifest.hpp"
#include "fairgauge/metrics.hpp"
#include "fairgauge/report_io.hpp"
#include "fairgauge/sampler.hpp"
#include "fairgauge/stats.hpp"
#include "fairgauge/svg.hpp"
#include "fairgauge/synth.hpp"

namespace fs = std::filesystem;
using namespace fairgauge;

namespace {

// exit-code 2 class of problems: the inputs parse but cannot be audited
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DatasetSchema parse_schema(const std::string& spec) {
    DatasetSchema schema;
    if (spec.empty()) return schema;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string item = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? spec.size() : comma + 1;
        std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad --schema entry '" + item + "' (want field=column)");
        std::string field = item.substr(0, eq), column = item.substr(eq + 1);
        if (field == "id")
            schema.id = column.empty() ? std::nullopt : std::optional<std::string>(column);
        else if (field == "group")
            schema.group = column;
        else if (field == "true_class")
            schema.true_class = column;
        else if (field == "predicted_class")
            schema.predicted_class =
                column.empty() ? std::nullopt : std::optional<std::string>(column);
        else if (field == "text")
            schema.text = column.empty() ? std::nullopt : std::optional<std::string>(column);
        else
            throw std::runtime_error("unknown --schema field '" + field + "'");
    }
    return schema;
}

FileFormat resolve_format(const std::string& path, const std::string& flag) {
    if (flag == "csv") return FileFormat::csv;
    if (flag == "jsonl") return FileFormat::jsonl;
    return format_from_path(path);
}

ClassFilter parse_filter(const std::string& spec) {
    if (spec.empty() || spec == "any-prediction") return ClassFilter::any_prediction();
    if (spec.rfind("min-preds=", 0) == 0) {
        long long k = 0;
        try {
            k = std::stoll(spec.substr(10));
        } catch (const std::exception&) {
            throw std::runtime_error("bad --filter '" + spec + "' (want min-preds=K)");
        }
        if (k < 0) throw std::runtime_error("--filter min-preds must be >= 0");
        return ClassFilter::min_predictions_per_group(k);
    }
    throw std::runtime_error("bad --filter '" + spec + "' (any-prediction or min-preds=K)");
}

std::pair<std::string, std::string> parse_groups(const std::string& spec) {
    std::size_t comma = spec.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= spec.size())
        throw std::runtime_error("--groups wants two comma-separated labels, got '" + spec + "'");
    return {spec.substr(0, comma), spec.substr(comma + 1)};
}

// FAIRGAUGE_SEED > --seed flag > file/default
std::uint64_t resolve_seed(std::uint64_t base, const std::optional<std::uint64_t>& flag_seed) {
    std::uint64_t seed = flag_seed ? *flag_seed : base;
    if (const char* env = std::getenv("FAIRGAUGE_SEED")) seed = std::strtoull(env, nullptr, 10);
    return seed;
}

nlohmann::json gap_value_json(const GapValue& g) {
    nlohmann::json j;
    j["metric"] = metric_name(g.kind);
    j["class"] = g.label;
    j["value_a"] = g.value_a ? nlohmann::json(canonical_float(*g.value_a)) : nullptr;
    j["value_b"] = g.value_b ? nlohmann::json(canonical_float(*g.value_b)) : nullptr;
    j["gap"] = g.gap ? nlohmann::json(canonical_float(*g.gap)) : nullptr;
    j["support_a"] = g.support_a;
    j["support_b"] = g.support_b;
    return j;
}

nlohmann::json gap_table_json(const GapTable& table) {
    nlohmann::json doc;
    doc["group_a"] = table.group_a;
    doc["group_b"] = table.group_b;
    doc["gaps"] = nlohmann::json::array();
    for (const GapValue& g : table.gaps) doc["gaps"].push_back(gap_value_json(g));
    doc["supports"] = nlohmann::json::array();
    for (const auto& row : table.supports)
        doc["supports"].push_back({{"group", row.group},
                                   {"class", row.label},
                                   {"n_gp", row.counts.n_gp},
                                   {"n_tpr", row.counts.n_tpr},
                                   {"n_pp", row.counts.n_pp}});
    return doc;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

AuditDataset load_input(const std::string& dataset, const std::string& format,
                        const std::string& schema) {
    return load_dataset(dataset, resolve_format(dataset, format), parse_schema(schema));
}

void require_predictions(const AuditDataset& ds, const DatasetSchema& schema) {
    for (const Record& r : ds.records())
        if (r.predicted_class) return;
    std::string column = schema.predicted_class ? *schema.predicted_class : "predicted_class";
    throw ValidationFailure("dataset has no predictions (column '" + column + "' empty or absent)");
}

void require_group(const AuditDataset& ds, const std::string& label) {
    if (!ds.group_index(label))
        throw ValidationFailure("group '" + label + "' not in dataset vocabulary");
}

// ---------------------------------------------------------------- audit --

struct AuditArgs {
    std::string dataset, format, schema, groups = "", filter = "any-prediction", out = "audit_out";
    double alpha = 0.05;
};

int cmd_audit(const AuditArgs& args) {
    DatasetSchema schema = parse_schema(args.schema);
    AuditDataset ds = load_input(args.dataset, args.format, args.schema);
    require_predictions(ds, schema);

    std::string ga, gb;
    if (args.groups.empty()) {
        if (ds.groups().size() < 2) throw ValidationFailure("dataset has fewer than 2 groups");
        ga = ds.groups()[0];
        gb = ds.groups()[1];
    } else {
        std::tie(ga, gb) = parse_groups(args.groups);
        require_group(ds, ga);
        require_group(ds, gb);
    }

    GapTable table = gap_table(ds, ga, gb);
    ValidationReport vreport = validate(ds);

    // one pseudo-replicate carries the whole dataset through the filter
    ReplicateResult base = evaluate_replicate(ds, ga, gb, "base", (std::int64_t)ds.size(), 0, 0);
    FilterOutcome filter = filter_classes(std::span(&base, 1), parse_filter(args.filter));

    fs::create_directories(args.out);
    write_text(fs::path(args.out) / "gap_table.json", gap_table_json(table).dump(2) + "\n");

    {
        std::ostringstream csv;
        csv << "metric,class,value_a,value_b,gap,support_a,support_b\n";
        for (const GapValue& g : table.gaps) {
            csv << metric_name(g.kind) << ',' << g.label << ','
                << (g.value_a ? format_float(*g.value_a) : "") << ','
                << (g.value_b ? format_float(*g.value_b) : "") << ','
                << (g.gap ? format_float(*g.gap) : "") << ',' << g.support_a << ','
                << g.support_b << '\n';
        }
        write_text(fs::path(args.out) / "gap_table.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "group,class,n_gp,n_tpr,n_pp\n";
        for (const auto& row : table.supports)
            csv << row.group << ',' << row.label << ',' << row.counts.n_gp << ','
                << row.counts.n_tpr << ',' << row.counts.n_pp << '\n';
        write_text(fs::path(args.out) / "support_counts.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "quantity,value\n";
        csv << "accuracy," << format_float(accuracy(ds)) << '\n';
        for (const std::string& label : ds.classes()) {
            auto f1 = f1_per_class(ds, label);
            csv << "f1:" << label << ',' << (f1 ? format_float(*f1) : "") << '\n';
        }
        write_text(fs::path(args.out) / "performance.csv", csv.str());
    }
    {
        nlohmann::json doc;
        doc["retained"] = filter.retained;
        doc["excluded"] = nlohmann::json::array();
        for (const auto& e : filter.excluded)
            doc["excluded"].push_back({{"class", e.label}, {"reason", e.reason}});
        write_text(fs::path(args.out) / "retained_classes.json", doc.dump(2) + "\n");
    }
    {
        nlohmann::json doc;
        doc["record_count"] = vreport.record_count;
        doc["missing_prediction_count"] = vreport.missing_prediction_count;
        doc["cells"] = nlohmann::json::array();
        for (const auto& c : vreport.cell_counts)
            doc["cells"].push_back({{"group", c.group}, {"class", c.label}, {"count", c.count}});
        doc["issues"] = nlohmann::json::array();
        for (const auto& i : vreport.issues)
            doc["issues"].push_back({{"id", i.record_id}, {"problem", i.problem}});
        write_text(fs::path(args.out) / "validation.json", doc.dump(2) + "\n");
    }

    RunManifest manifest;
    manifest.command = "audit";
    manifest.config = {{"dataset", args.dataset}, {"schema", args.schema},
                       {"groups", ga + "," + gb}, {"alpha", format_float(args.alpha)},
                       {"filter", args.filter},   {"out", args.out}};
    manifest.input_digests[args.dataset] = file_digest(args.dataset);
    manifest.timestamp = current_utc_timestamp();
    write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());
    std::cout << "audit: wrote " << args.out << "\n";
    return 0;
}

// ----------------------------------------------------------------- plan --

struct PlanArgs {
    std::string dataset, format, schema, plan_file, predictor = "builtin:identity";
    std::string groups = "", filter = "any-prediction", test = "pooled", variant = "base";
    std::string out = "plan_out";
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

int cmd_plan(const PlanArgs& args) {
    DatasetSchema schema = parse_schema(args.schema);
    AuditDataset ds = load_input(args.dataset, args.format, args.schema);

    SamplingPlan plan = load_plan(args.plan_file);
    plan.master_seed = resolve_seed(plan.master_seed, args.seed);
    check_plan(plan, ds.size());

    std::string ga, gb;
    if (args.groups.empty()) {
        if (ds.groups().size() < 2) throw ValidationFailure("dataset has fewer than 2 groups");
        ga = ds.groups()[0];
        gb = ds.groups()[1];
    } else {
        std::tie(ga, gb) = parse_groups(args.groups);
        require_group(ds, ga);
        require_group(ds, gb);
    }

    Predictor predictor;
    if (args.predictor == "builtin:identity") {
        predictor = identity_predictor();
    } else if (args.predictor == "builtin:keep") {
        require_predictions(ds, schema);
        predictor = keep_predictor();
    } else {
        predictor = subprocess_predictor(args.predictor,
                                         (fs::path(args.out) / "predictor_io").string());
    }

    TTestVariant variant =
        args.test == "welch" ? TTestVariant::welch : TTestVariant::student_pooled;
    ClassFilter filter = parse_filter(args.filter);

    fs::create_directories(fs::path(args.out) / "replicates");
    std::vector<ReplicateResult> results;
    std::vector<ReplicateError> errors;
    run_plan(
        plan, ds, predictor,
        [&](ReplicateHandle&& h) {
            ReplicateResult r =
                evaluate_replicate(h.test, ga, gb, args.variant, h.size, h.index, h.seed);
            fs::path dir = fs::path(args.out) / "replicates" /
                           ("size" + std::to_string(h.size) + "_rep" + std::to_string(h.index));
            fs::create_directories(dir);
            nlohmann::json doc = gap_table_json(r.gaps);
            doc["size"] = h.size;
            doc["index"] = h.index;
            doc["seed"] = h.seed;
            doc["train_records"] = h.train.size();
            doc["test_records"] = h.test.size();
            doc["accuracy"] =
                r.accuracy ? nlohmann::json(canonical_float(*r.accuracy)) : nullptr;
            for (const auto& [label, f1] : r.f1)
                doc["f1"][label] = f1 ? nlohmann::json(canonical_float(*f1)) : nullptr;
            write_text(dir / "result.json", doc.dump(2) + "\n");
            results.push_back(std::move(r));
        },
        [&](const ReplicateError& e) { errors.push_back(e); }, args.threads);

    if (!errors.empty()) {
        for (const auto& e : errors)
            std::cerr << "predictor failed at size=" << e.size << " replicate=" << e.index
                      << ": " << e.message << "\n";
        return 3;
    }

    SummaryReport report = build_report(results, args.alpha, filter, variant);
    write_report_json(report, (fs::path(args.out) / "report.json").string());
    write_report_csvs(report, (fs::path(args.out) / "tables").string());

    RunManifest manifest;
    manifest.command = "plan";
    manifest.config = {{"dataset", args.dataset},   {"schema", args.schema},
                       {"plan", args.plan_file},    {"predictor-cmd", args.predictor},
                       {"groups", ga + "," + gb},   {"alpha", format_float(args.alpha)},
                       {"filter", args.filter},     {"test", args.test},
                       {"variant", args.variant},   {"threads", std::to_string(args.threads)},
                       {"out", args.out}};
    manifest.master_seed = plan.master_seed;
    manifest.input_digests[args.dataset] = file_digest(args.dataset);
    manifest.input_digests[args.plan_file] = file_digest(args.plan_file);
    manifest.timestamp = current_utc_timestamp();
    write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());
    std::cout << "plan: " << results.size() << " replicates, wrote " << args.out << "\n";
    return 0;
}

// --------------------------------------------------------------- debias --

struct DebiasArgs {
    std::string dataset, format, schema, target = "M", lexicon, indicator_map;
    std::string neutral_name = "Camille", out = "debias_out";
};

int cmd_debias(const DebiasArgs& args) {
    AuditDataset ds = load_input(args.dataset, args.format, args.schema);

    DebiasConfig config =
        args.target == "F" ? DebiasConfig::toward_female() : DebiasConfig::toward_male();
    if (!args.lexicon.empty()) config.name_lexicon = load_lexicon(args.lexicon);
    if (!args.indicator_map.empty()) config.indicator_map = load_indicator_map(args.indicator_map);
    config.neutral_name = args.neutral_name;

    auto [debiased, report] = neutralize_dataset(ds, config);

    fs::create_directories(args.out);
    write_jsonl(debiased, (fs::path(args.out) / "debiased.jsonl").string());
    {
        nlohmann::json doc;
        doc["replaced_indicator_count"] = report.replaced_indicator_count;
        doc["replaced_name_count"] = report.replaced_name_count;
        doc["per_token"] = report.per_token;
        doc["missing_text_ids"] = report.missing_text_ids;
        write_text(fs::path(args.out) / "debias_report.json", doc.dump(2) + "\n");
    }

    RunManifest manifest;
    manifest.command = "debias";
    manifest.config = {{"dataset", args.dataset},       {"schema", args.schema},
                       {"target", args.target},         {"lexicon", args.lexicon},
                       {"indicator-map", args.indicator_map},
                       {"neutral-name", args.neutral_name},
                       {"out", args.out}};
    manifest.input_digests[args.dataset] = file_digest(args.dataset);
    if (!args.lexicon.empty()) manifest.input_digests[args.lexicon] = file_digest(args.lexicon);
    manifest.timestamp = current_utc_timestamp();
    write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());
    std::cout << "debias: " << report.replaced_indicator_count << " indicators, "
              << report.replaced_name_count << " names replaced; wrote " << args.out << "\n";
    return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
    std::string spec = "builtin:surgeon", out = "simulate_out";
    std::int64_t n = 10000;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& args) {
    PopulationSpec spec;
    if (args.spec == "builtin:surgeon") {
        spec = surgeon_scenario();
    } else {
        spec = load_population_spec(args.spec);  // validates with exact locations
    }
    std::uint64_t seed = resolve_seed(1, args.seed);

    AuditDataset ds = generate(spec, args.n, seed);
    TrueMetrics tm = true_metrics(spec);

    fs::create_directories(args.out);
    write_jsonl(ds, (fs::path(args.out) / "dataset.jsonl").string());
    write_population_spec(spec, (fs::path(args.out) / "population_spec.json").string());

    {
        nlohmann::json doc;
        doc["cells"] = nlohmann::json::array();
        for (const auto& c : tm.cells)
            doc["cells"].push_back(
                {{"group", c.group},
                 {"class", c.label},
                 {"GP", canonical_float(c.gp)},
                 {"TPR", canonical_float(c.tpr)},
                 {"PP", c.pp ? nlohmann::json(canonical_float(*c.pp)) : nullptr}});
        doc["gaps"] = nlohmann::json::array();
        for (const auto& g : tm.gaps)
            doc["gaps"].push_back(
                {{"metric", metric_name(g.kind)},
                 {"group_a", g.group_a},
                 {"group_b", g.group_b},
                 {"class", g.label},
                 {"gap", g.gap ? nlohmann::json(canonical_float(*g.gap)) : nullptr}});
        write_text(fs::path(args.out) / "true_metrics.json", doc.dump(2) + "\n");
    }
    {
        std::ostringstream csv;
        csv << "group,class,GP,TPR,PP\n";
        for (const auto& c : tm.cells)
            csv << c.group << ',' << c.label << ',' << format_float(c.gp) << ','
                << format_float(c.tpr) << ',' << (c.pp ? format_float(*c.pp) : "") << '\n';
        write_text(fs::path(args.out) / "true_metrics.csv", csv.str());
    }

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = {{"spec", args.spec},
                       {"n", std::to_string(args.n)},
                       {"out", args.out}};
    manifest.master_seed = seed;
    if (args.spec != "builtin:surgeon")
        manifest.input_digests[args.spec] = file_digest(args.spec);
    manifest.timestamp = current_utc_timestamp();
    write_manifest(manifest, (fs::path(args.out) / "manifest.json").string());
    std::cout << "simulate: " << args.n << " records, wrote " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- render --

struct RenderArgs {
    std::string report, out = "render_out";
};

int cmd_render(const RenderArgs& args) {
    SummaryReport report = read_report_json(args.report);
    auto written = render_report(report, args.out);
    std::cout << "render: " << written.size() << " files, wrote " << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairgauge: group-fairness audit toolkit"};
    app.require_subcommand(1);

    AuditArgs audit_args;
    auto* audit = app.add_subcommand("audit", "compute gap tables for one dataset");
    audit->add_option("--dataset", audit_args.dataset, "dataset file (.csv or .jsonl)")
        ->required();
    audit->add_option("--format", audit_args.format, "csv|jsonl (default: by extension)");
    audit->add_option("--schema", audit_args.schema, "field=column list");
    audit->add_option("--groups", audit_args.groups, "ordered pair g,g~ (default: first two)");
    audit->add_option("--alpha", audit_args.alpha, "significance level");
    audit->add_option("--filter", audit_args.filter, "any-prediction | min-preds=K");
    audit->add_option("--out", audit_args.out, "output directory");

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "run a multi-size multi-replicate sampling plan");
    plan->add_option("--dataset", plan_args.dataset, "source dataset")->required();
    plan->add_option("--format", plan_args.format, "csv|jsonl");
    plan->add_option("--schema", plan_args.schema, "field=column list");
    plan->add_option("--plan", plan_args.plan_file, "plan JSON file")->required();
    plan->add_option("--predictor-cmd", plan_args.predictor,
                     "builtin:identity | builtin:keep | external command");
    plan->add_option("--groups", plan_args.groups, "ordered pair g,g~");
    plan->add_option("--alpha", plan_args.alpha, "significance level");
    plan->add_option("--filter", plan_args.filter, "any-prediction | min-preds=K");
    plan->add_option("--test", plan_args.test, "pooled|welch");
    plan->add_option("--variant", plan_args.variant, "dataset variant label");
    plan->add_option("--seed", plan_args.seed, "master seed override");
    plan->add_option("--threads", plan_args.threads, "parallel replicates");
    plan->add_option("--out", plan_args.out, "output directory");

    DebiasArgs debias_args;
    auto* debias = app.add_subcommand("debias", "neutralize gender indicators in text");
    debias->add_option("--dataset", debias_args.dataset, "dataset with text")->required();
    debias->add_option("--format", debias_args.format, "csv|jsonl");
    debias->add_option("--schema", debias_args.schema, "field=column list");
    debias->add_option("--target", debias_args.target, "target gender M|F");
    debias->add_option("--lexicon", debias_args.lexicon, "first-name lexicon file");
    debias->add_option("--indicator-map", debias_args.indicator_map, "JSON map override");
    debias->add_option("--neutral-name", debias_args.neutral_name, "replacement first name");
    debias->add_option("--out", debias_args.out, "output directory");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic population");
    sim->add_option("--spec", sim_args.spec, "population spec JSON or builtin:surgeon");
    sim->add_option("--n", sim_args.n, "records to generate");
    sim->add_option("--seed", sim_args.seed, "generator seed");
    sim->add_option("--out", sim_args.out, "output directory");

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "emit SVG figures from a report");
    render->add_option("--report", render_args.report, "report.json path")->required();
    render->add_option("--out", render_args.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (audit->parsed()) return cmd_audit(audit_args);
        if (plan->parsed()) return cmd_plan(plan_args);
        if (debias->parsed()) return cmd_debias(debias_args);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (render->parsed()) return cmd_render(render_args);
    } catch (const ValidationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        // invalid specs, bad labels, out-of-range plans
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
