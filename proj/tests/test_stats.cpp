#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairgauge/report_io.hpp"
#include "fairgauge/rng.hpp"
#include "fairgauge/sampler.hpp"
#include "fairgauge/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fairgauge;

namespace {

std::vector<std::optional<double>> opt(std::initializer_list<std::optional<double>> xs) {
    return std::vector<std::optional<double>>(xs);
}

std::vector<ReplicateResult> identity_results(int sizes, int replicates) {
    AuditDataset ds = fixtures::balanced_identity_fixture();
    SamplingPlan plan;
    for (int s = 0; s < sizes; ++s) plan.sizes.push_back(40 + 20 * s);
    plan.replicates_per_size = replicates;
    plan.master_seed = 7;
    std::vector<ReplicateResult> results;
    for (auto& h : run_plan(plan, ds, identity_predictor()))
        results.push_back(evaluate_replicate(h.test, "M", "F", "base", h.size, h.index, h.seed));
    return results;
}

}  // namespace

TEST_CASE("summarize: frozen hand values") {
    Summary s1 = summarize(std::span<const std::optional<double>>(opt({1.0, 1.0, 1.0})));
    CHECK(s1.count == 3);
    CHECK(s1.mean == 1.0);
    CHECK(*s1.variance == 0.0);

    Summary s2 = summarize(std::span<const std::optional<double>>(opt({0.0, 1.0})));
    CHECK(s2.mean == 0.5);
    CHECK(*s2.variance == 0.5);  // (0.25 + 0.25) / 1

    Summary s3 =
        summarize(std::span<const std::optional<double>>(opt({0.2, std::nullopt, 0.4})));
    CHECK(s3.count == 2);
    CHECK(s3.undefined_count == 1);
    CHECK(s3.mean == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("summarize: all-UNDEFINED input throws") {
    CHECK_THROWS_AS(
        summarize(std::span<const std::optional<double>>(opt({std::nullopt, std::nullopt}))),
        std::invalid_argument);
}

TEST_CASE("summarize: single defined value has no variance") {
    Summary s = summarize(std::span<const std::optional<double>>(opt({0.25})));
    CHECK(s.count == 1);
    CHECK_FALSE(s.variance.has_value());
    CHECK(s.min == 0.25);
    CHECK(s.median == 0.25);
}

TEST_CASE("summarize: quartiles by linear interpolation") {
    std::vector<double> five = {0.0, 0.25, 0.5, 0.75, 1.0};
    Summary s = summarize(std::span<const double>(five));
    CHECK(s.min == 0.0);
    CHECK(s.q1 == 0.25);
    CHECK(s.median == 0.5);
    CHECK(s.q3 == 0.75);
    CHECK(s.max == 1.0);

    std::vector<double> two = {0.0, 1.0};
    Summary s2 = summarize(std::span<const double>(two));
    CHECK(s2.q1 == 0.25);
    CHECK(s2.median == 0.5);  // midpoint of the central pair
    CHECK(s2.q3 == 0.75);

    std::vector<double> four = {1.0, 2.0, 3.0, 4.0};
    Summary s4 = summarize(std::span<const double>(four));
    CHECK(s4.median == 2.5);
    CHECK(s4.q1 == 1.75);
    CHECK(s4.q3 == 3.25);
}

TEST_CASE("summarize matches the naive two-pass reference within 1e-12") {
    SplitMix64 rng(88);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs;
        int n = 2 + (int)rng.bounded(60);
        for (int i = 0; i < n; ++i) xs.push_back(rng.next_double() * 10 - 5);
        Summary got = summarize(std::span<const double>(xs));
        oracles::NaiveSummary expect = oracles::naive_summary(xs);
        CHECK(std::fabs(got.mean - expect.mean) <= 1e-12 * std::max(1.0, std::fabs(expect.mean)));
        CHECK(std::fabs(*got.variance - expect.variance) <=
              1e-12 * std::max(1.0, expect.variance));
        double lo = *std::min_element(xs.begin(), xs.end());
        double hi = *std::max_element(xs.begin(), xs.end());
        CHECK(got.min == lo);
        CHECK(got.max == hi);
        CHECK(got.min <= got.q1);
        CHECK(got.q1 <= got.median);
        CHECK(got.median <= got.q3);
        CHECK(got.q3 <= got.max);
    }
}

TEST_CASE("student_t_two_sided_p matches the quadrature oracle") {
    for (double df : {1.0, 2.0, 5.0, 8.0, 20.0, 49.0, 98.0, 7.2345})
        for (double t : {0.0, 0.3, 0.5, 1.0, 2.0, 3.5, 6.0}) {
            double got = student_t_two_sided_p(t, df);
            double expect = oracles::quad_t_two_sided_p(t, df);
            CHECK(std::fabs(got - expect) < 1e-10);
        }
    // closed forms: df=1 -> 1 - 2*atan(t)/pi; df=2 -> 1 - t/sqrt(t^2+2)
    CHECK(student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided_p(1.0, 2.0) ==
          doctest::Approx(1.0 - 1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("t_test: pooled fixture a=(1..5), b=(2..6)") {
    // textbook pooled-variance computation: means 3 and 4, both variances
    // 2.5, pooled sd 1.5811, t = -1, df = 8; p frozen from the quadrature
    // oracle
    std::vector<double> a = {1, 2, 3, 4, 5}, b = {2, 3, 4, 5, 6};
    TTestResult r = t_test(a, b, TTestVariant::student_pooled, 0.05);
    CHECK(std::fabs(r.t_statistic - (-1.0)) < 1e-12);
    CHECK(r.degrees_of_freedom == 8.0);
    CHECK(std::fabs(r.p_value - 0.34659350708733427) < 1e-10);
    CHECK_FALSE(r.significant);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("t_test: identical samples give t=0, p=1") {
    std::vector<double> a = {0.3, 0.5, 0.9, 0.2};
    TTestResult r = t_test(a, a);
    CHECK(r.t_statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK_FALSE(r.significant);
}

TEST_CASE("t_test: swap symmetry") {
    SplitMix64 rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 8; ++i) a.push_back(rng.next_normal());
        for (int i = 0; i < 11; ++i) b.push_back(rng.next_normal() + 0.3);
        for (TTestVariant v : {TTestVariant::student_pooled, TTestVariant::welch}) {
            TTestResult ab = t_test(a, b, v);
            TTestResult ba = t_test(b, a, v);
            CHECK(ab.t_statistic == doctest::Approx(-ba.t_statistic).epsilon(1e-14));
            CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-14));
            CHECK(ab.degrees_of_freedom == doctest::Approx(ba.degrees_of_freedom));
        }
    }
}

TEST_CASE("t_test: welch reduces toward pooled for equal sizes/variances") {
    std::vector<double> a = {1, 2, 3, 4, 5}, b = {2, 3, 4, 5, 6};
    TTestResult w = t_test(a, b, TTestVariant::welch);
    CHECK(w.t_statistic == doctest::Approx(-1.0));
    CHECK(w.degrees_of_freedom == doctest::Approx(8.0));
}

TEST_CASE("t_test: degenerate inputs") {
    std::vector<double> c1 = {2, 2, 2}, c2 = {2, 2, 2}, c3 = {3, 3, 3};
    TTestResult same = t_test(c1, c2);
    CHECK(same.degenerate);
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value == 1.0);

    TTestResult diff = t_test(c1, c3);
    CHECK(diff.degenerate);
    CHECK(diff.p_value == 0.0);
    CHECK(diff.significant);

    std::vector<double> tiny = {1.0};
    CHECK_THROWS_AS(t_test(tiny, c1), std::invalid_argument);
}

TEST_CASE("t_test calibration smoke: same-distribution rejection rate near alpha") {
    SplitMix64 rng(31);
    int rejections = 0;
    const int trials = 2000;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 50; ++i) a.push_back(rng.next_normal());
        for (int i = 0; i < 50; ++i) b.push_back(rng.next_normal());
        if (t_test(a, b).significant) ++rejections;
    }
    double rate = (double)rejections / trials;
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
}

TEST_CASE("filter_classes: rules and reasons") {
    AuditDataset ds = fixtures::balanced_identity_fixture();
    SamplingPlan plan;
    plan.sizes = {40};
    plan.replicates_per_size = 2;
    plan.master_seed = 3;
    std::vector<ReplicateResult> results;
    for (auto& h : run_plan(plan, ds, identity_predictor()))
        results.push_back(evaluate_replicate(h.test, "M", "F", "base", h.size, h.index, h.seed));

    SUBCASE("balanced identity keeps everything under any-prediction") {
        FilterOutcome out = filter_classes(results, ClassFilter::any_prediction());
        CHECK(out.retained == std::vector<std::string>{"a", "b"});
        CHECK(out.excluded.empty());
    }
    SUBCASE("raising k to the cell size excludes with a reason") {
        FilterOutcome out = filter_classes(results, ClassFilter::min_predictions_per_group(1000));
        CHECK(out.retained.empty());
        REQUIRE(out.excluded.size() == 2);
        CHECK(out.excluded[0].reason.find("predictions") != std::string::npos);
    }
}

TEST_CASE("filter_classes: class unpredicted for one group in one replicate is dropped") {
    // replicate 1 never predicts b for group F
    std::vector<Record> r1 = {
        fixtures::rec("1", "M", "a", "a"), fixtures::rec("2", "M", "b", "b"),
        fixtures::rec("3", "F", "a", "a"), fixtures::rec("4", "F", "b", "b"),
    };
    std::vector<Record> r2 = {
        fixtures::rec("1", "M", "a", "a"), fixtures::rec("2", "M", "b", "b"),
        fixtures::rec("3", "F", "a", "a"), fixtures::rec("4", "F", "b", "a"),
    };
    auto ds1 = AuditDataset::from_records("r1", std::move(r1));
    auto ds2 = AuditDataset::from_records("r2", std::move(r2));
    std::vector<ReplicateResult> results = {
        evaluate_replicate(ds1, "M", "F", "base", 4, 0, 0),
        evaluate_replicate(ds2, "M", "F", "base", 4, 1, 0),
    };
    FilterOutcome out = filter_classes(results, ClassFilter::any_prediction());
    CHECK(out.retained == std::vector<std::string>{"a"});
    REQUIRE(out.excluded.size() == 1);
    CHECK(out.excluded[0].label == "b");
    CHECK(out.excluded[0].reason.find("replicate 1") != std::string::npos);
}

TEST_CASE("filter_classes: fixture where exactly {a, c} of {a, b, c} pass") {
    // b has zero predictions for group F; a and c are predicted for both
    std::vector<Record> records = {
        fixtures::rec("1", "M", "a", "a"), fixtures::rec("2", "M", "b", "b"),
        fixtures::rec("3", "M", "c", "c"), fixtures::rec("4", "F", "a", "a"),
        fixtures::rec("5", "F", "b", "c"), fixtures::rec("6", "F", "c", "a"),
        fixtures::rec("7", "F", "c", "c"),
    };
    auto ds = AuditDataset::from_records("abc", std::move(records));
    std::vector<ReplicateResult> results = {evaluate_replicate(ds, "M", "F", "base", 7, 0, 0)};
    FilterOutcome out = filter_classes(results, ClassFilter::any_prediction());
    CHECK(out.retained == std::vector<std::string>{"a", "c"});
}

TEST_CASE("filter_classes: retained under min-preds=10 with 11 everywhere") {
    std::vector<Record> records;
    int n = 0;
    for (const char* g : {"M", "F"})
        for (const char* c : {"a", "b"})
            for (int i = 0; i < 11; ++i)
                records.push_back(fixtures::rec("r" + std::to_string(n++), g, c, c));
    auto ds = AuditDataset::from_records("eleven", std::move(records));
    std::vector<ReplicateResult> results = {evaluate_replicate(ds, "M", "F", "base", n, 0, 0)};
    CHECK(filter_classes(results, ClassFilter::min_predictions_per_group(10)).retained ==
          std::vector<std::string>{"a", "b"});
    CHECK(filter_classes(results, ClassFilter::min_predictions_per_group(11)).retained.empty());
}

TEST_CASE("filter_classes: monotone in k") {
    SplitMix64 rng(6021);
    std::vector<ReplicateResult> results;
    for (int i = 0; i < 4; ++i) {
        AuditDataset ds = oracles::random_dataset(rng, 60, 2, 3, false);
        results.push_back(evaluate_replicate(ds, "g0", "g1", "base", 60, i, 0));
    }
    std::size_t prev = 4;  // > class count
    for (std::int64_t k = 0; k < 8; ++k) {
        auto retained = filter_classes(results, ClassFilter::min_predictions_per_group(k)).retained;
        CHECK(retained.size() <= prev);
        prev = retained.size();
    }
}

TEST_CASE("build_report: single size, identity predictor -> all gaps 0, variance 0") {
    auto results = identity_results(1, 3);
    SummaryReport report = build_report(results, 0.05, ClassFilter::any_prediction());
    REQUIRE(report.variants.size() == 1);
    REQUIRE(report.variants[0].sizes.size() == 1);
    const SizeBlock& sb = report.variants[0].sizes[0];
    for (const GapCellSummary& cell : sb.gap_summaries) {
        REQUIRE(cell.summary.has_value());
        CHECK(cell.summary->mean == 0.0);
        CHECK(*cell.summary->variance == 0.0);
        CHECK(cell.undefined_count == 0);
    }
    REQUIRE(sb.accuracy.has_value());
    CHECK(sb.accuracy->mean == 1.0);
}

TEST_CASE("build_report: 2 sizes x 3 replicates -> one size-pair test per quantity") {
    auto results = identity_results(2, 3);
    SummaryReport report = build_report(results, 0.05, ClassFilter::any_prediction());
    // quantities: 3 metrics x 2 classes gaps + accuracy + 2 f1 = 9, one
    // size pair each
    int gap_tests = 0, accuracy_tests = 0, f1_tests = 0;
    for (const ComparisonTest& ct : report.size_tests) {
        CHECK(ct.size_a == 40);
        CHECK(ct.size_b == 60);
        if (ct.quantity.rfind("gap:", 0) == 0) ++gap_tests;
        if (ct.quantity == "accuracy") ++accuracy_tests;
        if (ct.quantity.rfind("f1:", 0) == 0) ++f1_tests;
    }
    CHECK(gap_tests == 6);  // exactly 1 per (metric, class)
    CHECK(accuracy_tests == 1);
    CHECK(f1_tests == 2);
    CHECK(report.variant_tests.empty());
}

TEST_CASE("build_report: variant pairs are tested at equal sizes") {
    auto base = identity_results(1, 3);
    auto other = identity_results(1, 3);
    for (auto& r : other) r.variant = "debiased";
    std::vector<ReplicateResult> all(base.begin(), base.end());
    all.insert(all.end(), other.begin(), other.end());

    SummaryReport report = build_report(all, 0.05, ClassFilter::any_prediction());
    CHECK(report.variants.size() == 2);
    CHECK(!report.variant_tests.empty());
    for (const ComparisonTest& ct : report.variant_tests) {
        CHECK(ct.variant_a == "base");
        CHECK(ct.variant_b == "debiased");
        CHECK(ct.size_a == ct.size_b);
    }
}

TEST_CASE("build_report: all-UNDEFINED cells are flagged empty, not dropped") {
    // class b never predicted: PP(., b) undefined in every replicate
    std::vector<Record> records = {
        fixtures::rec("1", "M", "a", "a"), fixtures::rec("2", "M", "b", "a"),
        fixtures::rec("3", "F", "a", "a"), fixtures::rec("4", "F", "b", "a"),
    };
    auto ds = AuditDataset::from_records("undef", std::move(records));
    std::vector<ReplicateResult> results = {
        evaluate_replicate(ds, "M", "F", "base", 4, 0, 0),
        evaluate_replicate(ds, "M", "F", "base", 4, 1, 0),
    };
    // keep class b in play by filtering on nothing
    SummaryReport report = build_report(results, 0.05, ClassFilter::min_predictions_per_group(-1));
    const SizeBlock& sb = report.variants[0].sizes[0];
    bool saw_flagged = false;
    for (const GapCellSummary& cell : sb.gap_summaries)
        if (cell.kind == MetricKind::predictive_parity && cell.label == "b") {
            CHECK_FALSE(cell.summary.has_value());
            CHECK(cell.undefined_count == 2);
            saw_flagged = true;
        }
    CHECK(saw_flagged);
}

TEST_CASE("build_report: deterministic serialization") {
    auto results = identity_results(2, 3);
    SummaryReport r1 = build_report(results, 0.05, ClassFilter::any_prediction());
    SummaryReport r2 = build_report(results, 0.05, ClassFilter::any_prediction());
    CHECK(report_to_json(r1) == report_to_json(r2));
}
