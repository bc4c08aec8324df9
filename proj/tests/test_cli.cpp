#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "fairgauge/dataset.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return FAIRGAUGE_CLI_PATH; }

int run_raw(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cli(const std::string& args, const fs::path& log) {
    return run_raw(std::string(cli_path()) + " " + args + " >" + log.string() + " 2>&1");
}

void write_eight_record_csv(const fs::path& path) {
    oracles::write_file(path,
                        "id,group,true_class,predicted_class\n"
                        "m1,M,a,a\nm2,M,a,a\nm3,M,a,b\nm4,M,b,b\n"
                        "f1,F,a,a\nf2,F,a,b\nf3,F,b,b\nf4,F,b,b\n");
}

std::string csv_row_with(const std::string& content, const std::string& needle) {
    std::size_t pos = content.find(needle);
    if (pos == std::string::npos) return "";
    std::size_t start = content.rfind('\n', pos);
    start = start == std::string::npos ? 0 : start + 1;
    std::size_t end = content.find('\n', pos);
    return content.substr(start, end - start);
}

}  // namespace

TEST_CASE("cli audit: eight-record fixture reproduces the hand gap") {
    auto dir = oracles::fresh_dir("cli_audit");
    write_eight_record_csv(dir / "eight.csv");
    int rc = run_cli("audit --dataset " + (dir / "eight.csv").string() +
                         " --groups M,F --out " + (dir / "out").string(),
                     dir / "log.txt");
    REQUIRE(rc == 0);

    std::string gaps = oracles::read_file(dir / "out" / "gap_table.csv");
    std::string row = csv_row_with(gaps, "GP,a");
    CHECK(row == "GP,a,0.5,0.25,0.25,2,1");

    std::string perf = oracles::read_file(dir / "out" / "performance.csv");
    CHECK(perf.find("accuracy,0.75") != std::string::npos);

    CHECK(fs::exists(dir / "out" / "support_counts.csv"));
    CHECK(fs::exists(dir / "out" / "gap_table.json"));
    CHECK(fs::exists(dir / "out" / "retained_classes.json"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("cli audit: identity predictions give all-zero gaps") {
    auto dir = oracles::fresh_dir("cli_audit_id");
    oracles::write_file(dir / "id.csv",
                        "id,group,true_class,predicted_class\n"
                        "1,M,a,a\n2,M,b,b\n3,F,a,a\n4,F,b,b\n");
    REQUIRE(run_cli("audit --dataset " + (dir / "id.csv").string() + " --groups M,F --out " +
                        (dir / "out").string(),
                    dir / "log.txt") == 0);
    auto doc = nlohmann::json::parse(oracles::read_file(dir / "out" / "gap_table.json"));
    for (const auto& gap : doc["gaps"]) {
        REQUIRE(!gap["gap"].is_null());
        CHECK(gap["gap"].get<double>() == 0.0);
    }
}

TEST_CASE("cli audit: missing predicted column exits 2 and names it") {
    auto dir = oracles::fresh_dir("cli_audit_nopred");
    oracles::write_file(dir / "nopred.csv", "id,group,true_class\n1,M,a\n2,F,b\n");
    int rc = run_cli("audit --dataset " + (dir / "nopred.csv").string() + " --out " +
                         (dir / "out").string(),
                     dir / "log.txt");
    CHECK(rc == 2);
    CHECK(oracles::read_file(dir / "log.txt").find("predicted_class") != std::string::npos);
}

TEST_CASE("cli audit: unreadable dataset exits 1, unknown group exits 2") {
    auto dir = oracles::fresh_dir("cli_audit_errs");
    CHECK(run_cli("audit --dataset " + (dir / "missing.csv").string() + " --out " +
                      (dir / "o").string(),
                  dir / "log.txt") == 1);

    write_eight_record_csv(dir / "eight.csv");
    CHECK(run_cli("audit --dataset " + (dir / "eight.csv").string() +
                      " --groups M,X --out " + (dir / "o2").string(),
                  dir / "log2.txt") == 2);
}

TEST_CASE("cli plan: replicate files, report, and byte-identical reruns") {
    auto dir = oracles::fresh_dir("cli_plan");
    // 2 groups x 2 classes, 60 records; identity predictor
    std::string csv = "id,group,true_class\n";
    for (int i = 0; i < 60; ++i)
        csv += "r" + std::to_string(i) + "," + (i % 2 ? "M" : "F") + "," +
               (i % 3 ? "a" : "b") + "\n";
    oracles::write_file(dir / "src.csv", csv);
    oracles::write_file(dir / "plan.json",
                        "{\"sizes\":[24,48],\"replicates_per_size\":3,"
                        "\"split_ratio\":0.7,\"master_seed\":5}");

    std::string base = "plan --dataset " + (dir / "src.csv").string() + " --plan " +
                       (dir / "plan.json").string() +
                       " --predictor-cmd builtin:identity --groups M,F";
    REQUIRE(run_cli(base + " --threads 4 --out " + (dir / "run1").string(),
                    dir / "log1.txt") == 0);
    REQUIRE(run_cli(base + " --threads 4 --out " + (dir / "run2").string(),
                    dir / "log2.txt") == 0);
    REQUIRE(run_cli(base + " --threads 1 --out " + (dir / "run3").string(),
                    dir / "log3.txt") == 0);

    // 6 replicate result files plus one report
    std::size_t result_files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir / "run1" / "replicates"))
        if (entry.path().filename() == "result.json") ++result_files;
    CHECK(result_files == 6);
    REQUIRE(fs::exists(dir / "run1" / "report.json"));

    std::string r1 = oracles::read_file(dir / "run1" / "report.json");
    CHECK(r1 == oracles::read_file(dir / "run2" / "report.json"));
    CHECK(r1 == oracles::read_file(dir / "run3" / "report.json"));
    CHECK(fs::exists(dir / "run1" / "tables" / "gap_summaries.csv"));
}

TEST_CASE("cli plan: FAIRGAUGE_SEED overrides the plan seed") {
    auto dir = oracles::fresh_dir("cli_seed");
    std::string csv = "id,group,true_class\n";
    for (int i = 0; i < 40; ++i)
        csv += "r" + std::to_string(i) + "," + (i % 2 ? "M" : "F") + "," +
               (i % 4 ? "a" : "b") + "\n";
    oracles::write_file(dir / "src.csv", csv);
    oracles::write_file(dir / "plan.json",
                        "{\"sizes\":[20],\"replicates_per_size\":2,"
                        "\"split_ratio\":0.7,\"master_seed\":5}");
    std::string base = "plan --dataset " + (dir / "src.csv").string() + " --plan " +
                       (dir / "plan.json").string() + " --groups M,F --out ";
    REQUIRE(run_raw("env FAIRGAUGE_SEED=99 " + std::string(cli_path()) + " " + base +
                    (dir / "env_run").string() + " >" + (dir / "l").string() + " 2>&1") == 0);
    auto manifest =
        nlohmann::json::parse(oracles::read_file(dir / "env_run" / "manifest.json"));
    CHECK(manifest["master_seed"].get<std::uint64_t>() == 99);
}

TEST_CASE("cli plan: external predictor failure exits 3 with coordinates") {
    auto dir = oracles::fresh_dir("cli_fail");
    std::string csv = "id,group,true_class\n";
    for (int i = 0; i < 30; ++i)
        csv += "r" + std::to_string(i) + "," + (i % 2 ? "M" : "F") + "," +
               (i % 3 ? "a" : "b") + "\n";
    oracles::write_file(dir / "src.csv", csv);
    oracles::write_file(dir / "plan.json",
                        "{\"sizes\":[10],\"replicates_per_size\":2,"
                        "\"split_ratio\":0.7,\"master_seed\":1}");
    int rc = run_cli("plan --dataset " + (dir / "src.csv").string() + " --plan " +
                         (dir / "plan.json").string() +
                         " --predictor-cmd /bin/false --groups M,F --out " +
                         (dir / "out").string(),
                     dir / "log.txt");
    CHECK(rc == 3);
    std::string log = oracles::read_file(dir / "log.txt");
    CHECK(log.find("size=10") != std::string::npos);
    CHECK(log.find("replicate=") != std::string::npos);
}

TEST_CASE("cli plan: subprocess predictor round trip") {
    auto dir = oracles::fresh_dir("cli_subproc");
    std::string csv = "id,group,true_class\n";
    for (int i = 0; i < 30; ++i)
        csv += "r" + std::to_string(i) + "," + (i % 2 ? "M" : "F") + "," +
               (i % 3 ? "a" : "b") + "\n";
    oracles::write_file(dir / "src.csv", csv);
    oracles::write_file(dir / "plan.json",
                        "{\"sizes\":[12],\"replicates_per_size\":2,"
                        "\"split_ratio\":0.7,\"master_seed\":2}");
    // a constant predictor: label everything "a"
    oracles::write_file(dir / "pred.sh",
                        "#!/bin/sh\n"
                        "test=\"$2\"; out=\"$3\"\n"
                        "printf '{' > \"$out\"\n"
                        "first=1\n"
                        "while IFS= read -r line; do\n"
                        "  id=$(printf '%s' \"$line\" | sed 's/.*\"id\":\"\\([^\"]*\\)\".*/\\1/')\n"
                        "  [ $first -eq 1 ] || printf ',' >> \"$out\"\n"
                        "  first=0\n"
                        "  printf '\"%s\":\"a\"' \"$id\" >> \"$out\"\n"
                        "done < \"$test\"\n"
                        "printf '}' >> \"$out\"\n");
    fs::permissions(dir / "pred.sh", fs::perms::owner_all);

    int rc = run_cli("plan --dataset " + (dir / "src.csv").string() + " --plan " +
                         (dir / "plan.json").string() + " --predictor-cmd " +
                         (dir / "pred.sh").string() + " --groups M,F --out " +
                         (dir / "out").string(),
                     dir / "log.txt");
    REQUIRE(rc == 0);
    // every test prediction is "a", so GP(g, a) = 1 for both groups
    auto report = nlohmann::json::parse(oracles::read_file(dir / "out" / "report.json"));
    bool found = false;
    for (const auto& cell : report["variants"][0]["sizes"][0]["gap_summaries"]) {
        if (cell["metric"] == "GP" && cell["class"] == "a") {
            CHECK(cell["summary"]["mean"].get<double>() == 0.0);  // 1 - 1
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("cli debias: fixture counts, idempotence, neutral name") {
    auto dir = oracles::fresh_dir("cli_debias");
    oracles::write_file(dir / "texts.jsonl",
                        "{\"id\":\"1\",\"group\":\"F\",\"true_class\":\"x\","
                        "\"text\":\"She sold her car.\"}\n"
                        "{\"id\":\"2\",\"group\":\"M\",\"true_class\":\"y\","
                        "\"text\":\"Mary waved to her.\"}\n");
    REQUIRE(run_cli("debias --dataset " + (dir / "texts.jsonl").string() +
                        " --target M --out " + (dir / "out1").string(),
                    dir / "log.txt") == 0);

    auto report =
        nlohmann::json::parse(oracles::read_file(dir / "out1" / "debias_report.json"));
    CHECK(report["replaced_indicator_count"].get<int>() == 3);  // she, her, her
    CHECK(report["replaced_name_count"].get<int>() == 1);       // Mary

    std::string out_jsonl = oracles::read_file(dir / "out1" / "debiased.jsonl");
    CHECK(out_jsonl.find("Camille") != std::string::npos);
    CHECK(out_jsonl.find("He sold his car.") != std::string::npos);

    // second pass over the debiased output is a no-op
    REQUIRE(run_cli("debias --dataset " + (dir / "out1" / "debiased.jsonl").string() +
                        " --target M --out " + (dir / "out2").string(),
                    dir / "log2.txt") == 0);
    auto report2 =
        nlohmann::json::parse(oracles::read_file(dir / "out2" / "debias_report.json"));
    CHECK(report2["replaced_indicator_count"].get<int>() == 0);
    CHECK(report2["replaced_name_count"].get<int>() == 0);
    CHECK(oracles::read_file(dir / "out2" / "debiased.jsonl") == out_jsonl);
}

TEST_CASE("cli simulate: writes dataset plus true metrics; bad spec exits 2") {
    auto dir = oracles::fresh_dir("cli_sim");
    REQUIRE(run_cli("simulate --spec builtin:surgeon --n 500 --seed 4 --out " +
                        (dir / "out").string(),
                    dir / "log.txt") == 0);
    CHECK(fs::exists(dir / "out" / "dataset.jsonl"));
    CHECK(fs::exists(dir / "out" / "true_metrics.json"));
    CHECK(fs::exists(dir / "out" / "true_metrics.csv"));
    CHECK(fs::exists(dir / "out" / "population_spec.json"));

    auto ds = fairgauge::load_dataset((dir / "out" / "dataset.jsonl").string(),
                                      fairgauge::FileFormat::jsonl);
    CHECK(ds.size() == 500);

    oracles::write_file(dir / "bad.json",
                        "{\"groups\":[{\"label\":\"A\",\"weight\":0.9}],\"classes\":[\"x\"],"
                        "\"prevalence\":{\"A\":[1.0]},\"confusion\":{\"A\":[[1.0]]}}");
    CHECK(run_cli("simulate --spec " + (dir / "bad.json").string() + " --out " +
                      (dir / "out2").string(),
                  dir / "log2.txt") == 2);
}

TEST_CASE("cli render: report to SVGs; malformed report exits 1") {
    auto dir = oracles::fresh_dir("cli_render");
    std::string csv = "id,group,true_class\n";
    for (int i = 0; i < 40; ++i)
        csv += "r" + std::to_string(i) + "," + (i % 2 ? "M" : "F") + "," +
               (i % 4 ? "a" : "b") + "\n";
    oracles::write_file(dir / "src.csv", csv);
    oracles::write_file(dir / "plan.json",
                        "{\"sizes\":[20],\"replicates_per_size\":3,"
                        "\"split_ratio\":0.7,\"master_seed\":8}");
    REQUIRE(run_cli("plan --dataset " + (dir / "src.csv").string() + " --plan " +
                        (dir / "plan.json").string() + " --groups M,F --out " +
                        (dir / "run").string(),
                    dir / "log.txt") == 0);

    REQUIRE(run_cli("render --report " + (dir / "run" / "report.json").string() + " --out " +
                        (dir / "figs").string(),
                    dir / "log2.txt") == 0);
    std::size_t svg_count = 0;
    for (const auto& entry : fs::directory_iterator(dir / "figs"))
        if (entry.path().extension() == ".svg") ++svg_count;
    CHECK(svg_count > 0);

    // render twice: byte identical
    REQUIRE(run_cli("render --report " + (dir / "run" / "report.json").string() + " --out " +
                        (dir / "figs2").string(),
                    dir / "log3.txt") == 0);
    for (const auto& entry : fs::directory_iterator(dir / "figs")) {
        auto twin = dir / "figs2" / entry.path().filename();
        CHECK(oracles::read_file(entry.path()) == oracles::read_file(twin));
    }

    oracles::write_file(dir / "broken.json", "{}");
    CHECK(run_cli("render --report " + (dir / "broken.json").string() + " --out " +
                      (dir / "figs3").string(),
                  dir / "log4.txt") == 1);
}
