#include "fairgauge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace fairgauge {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = (double)(n - 1) * p;
    std::size_t lo = (std::size_t)std::floor(h);
    if (lo + 1 >= n) return sorted[n - 1];
    double frac = h - (double)lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Summary summarize_defined(std::vector<double> defined, std::int64_t undefined_count) {
    if (defined.empty())
        throw std::invalid_argument("summarize: no defined values");
    Summary s;
    s.count = (std::int64_t)defined.size();
    s.undefined_count = undefined_count;

    double sum = 0.0;
    for (double v : defined) sum += v;
    s.mean = sum / (double)defined.size();
    if (defined.size() >= 2) {
        double ss = 0.0;
        for (double v : defined) {
            double d = v - s.mean;
            ss += d * d;
        }
        s.variance = ss / (double)(defined.size() - 1);
    }

    std::sort(defined.begin(), defined.end());
    s.min = defined.front();
    s.max = defined.back();
    s.q1 = quantile_sorted(defined, 0.25);
    s.median = quantile_sorted(defined, 0.5);
    s.q3 = quantile_sorted(defined, 0.75);
    return s;
}

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    double n = 0.0;
};

MeanVar mean_var(std::span<const double> xs) {
    MeanVar mv;
    mv.n = (double)xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    mv.mean = sum / mv.n;
    double ss = 0.0;
    for (double x : xs) {
        double d = x - mv.mean;
        ss += d * d;
    }
    mv.var = ss / (mv.n - 1.0);
    return mv;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("ibeta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw std::invalid_argument("t distribution requires df > 0");
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

Summary summarize(std::span<const std::optional<double>> values) {
    std::vector<double> defined;
    defined.reserve(values.size());
    std::int64_t undefined_count = 0;
    for (const auto& v : values) {
        if (v)
            defined.push_back(*v);
        else
            ++undefined_count;
    }
    return summarize_defined(std::move(defined), undefined_count);
}

Summary summarize(std::span<const double> values) {
    return summarize_defined(std::vector<double>(values.begin(), values.end()), 0);
}

TTestResult t_test(std::span<const double> a, std::span<const double> b, TTestVariant variant,
                   double alpha) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("t_test: both samples need at least 2 observations");

    MeanVar ma = mean_var(a);
    MeanVar mb = mean_var(b);

    TTestResult r;
    r.alpha = alpha;

    if (ma.var == 0.0 && mb.var == 0.0) {
        r.degenerate = true;
        if (ma.mean == mb.mean) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
        r.degrees_of_freedom = variant == TTestVariant::student_pooled ? ma.n + mb.n - 2.0 : 0.0;
        r.significant = r.p_value < alpha;
        return r;
    }

    if (variant == TTestVariant::student_pooled) {
        r.degrees_of_freedom = ma.n + mb.n - 2.0;
        double pooled = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / r.degrees_of_freedom;
        r.t_statistic = (ma.mean - mb.mean) / std::sqrt(pooled * (1.0 / ma.n + 1.0 / mb.n));
    } else {
        double ga = ma.var / ma.n, gb = mb.var / mb.n;
        r.t_statistic = (ma.mean - mb.mean) / std::sqrt(ga + gb);
        r.degrees_of_freedom =
            (ga + gb) * (ga + gb) / (ga * ga / (ma.n - 1.0) + gb * gb / (mb.n - 1.0));
    }
    r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
    r.significant = r.p_value < alpha;
    return r;
}

FilterOutcome filter_classes(std::span<const ReplicateResult> results, const ClassFilter& rule) {
    if (results.empty()) throw std::invalid_argument("filter_classes: no replicates");
    FilterOutcome out;
    const auto& classes = results.front().gaps.classes;

    for (const std::string& label : classes) {
        std::optional<std::string> reason;
        for (const ReplicateResult& r : results) {
            for (const auto& row : r.gaps.supports) {
                if (row.label != label) continue;
                if (row.counts.n_gp <= rule.min_predictions) {
                    reason = "variant " + r.variant + ", size " + std::to_string(r.size) +
                             ", replicate " + std::to_string(r.index) + ": group " + row.group +
                             " has " + std::to_string(row.counts.n_gp) +
                             " predictions (needs > " + std::to_string(rule.min_predictions) +
                             ")";
                    break;
                }
            }
            if (reason) break;
        }
        if (reason)
            out.excluded.push_back({label, *reason});
        else
            out.retained.push_back(label);
    }
    return out;
}

ReplicateResult evaluate_replicate(const AuditDataset& test, const std::string& group_a,
                                   const std::string& group_b, const std::string& variant,
                                   std::int64_t size, int index, std::uint64_t seed) {
    ReplicateResult r;
    r.variant = variant;
    r.size = size;
    r.index = index;
    r.seed = seed;
    r.gaps = gap_table(test, group_a, group_b);
    bool any_pred = false;
    for (const Record& rec : test.records())
        if (rec.predicted_class) {
            any_pred = true;
            break;
        }
    if (any_pred) r.accuracy = accuracy(test);
    for (const std::string& label : test.classes())
        r.f1.emplace_back(label, any_pred ? f1_per_class(test, label) : std::nullopt);
    return r;
}

namespace {

std::optional<Summary> maybe_summary(const std::vector<std::optional<double>>& values) {
    bool any = false;
    for (const auto& v : values)
        if (v) {
            any = true;
            break;
        }
    if (!any) return std::nullopt;
    return summarize(std::span<const std::optional<double>>(values));
}

std::vector<double> defined_of(const std::vector<std::optional<double>>& values) {
    std::vector<double> out;
    for (const auto& v : values)
        if (v) out.push_back(*v);
    return out;
}

// Pulls one quantity's per-replicate observations, in replicate order.
struct QuantitySeries {
    std::string quantity;
    std::vector<std::optional<double>> values;
};

std::vector<QuantitySeries> series_for(std::span<const ReplicateResult> results,
                                       const std::string& variant, std::int64_t size,
                                       const std::vector<std::string>& retained) {
    std::vector<QuantitySeries> series;
    for (MetricKind kind : kAllMetricKinds)
        for (const std::string& label : retained)
            series.push_back({std::string("gap:") + metric_name(kind) + ":" + label, {}});
    series.push_back({"accuracy", {}});
    for (const std::string& label : retained) series.push_back({"f1:" + label, {}});

    for (const ReplicateResult& r : results) {
        if (r.variant != variant || r.size != size) continue;
        std::size_t s = 0;
        for (MetricKind kind : kAllMetricKinds)
            for (const std::string& label : retained)
                series[s++].values.push_back(r.gaps.at(kind, label).gap);
        series[s++].values.push_back(r.accuracy);
        for (const std::string& label : retained) {
            std::optional<double> f1;
            for (const auto& [l, v] : r.f1)
                if (l == label) {
                    f1 = v;
                    break;
                }
            series[s++].values.push_back(f1);
        }
    }
    return series;
}

}  // namespace

SummaryReport build_report(std::span<const ReplicateResult> results, double alpha,
                           const ClassFilter& rule, TTestVariant variant) {
    if (results.empty()) throw std::invalid_argument("build_report: no replicates");

    SummaryReport report;
    report.group_a = results.front().gaps.group_a;
    report.group_b = results.front().gaps.group_b;
    report.alpha = alpha;
    report.test_variant = variant;
    report.filter_min_predictions = rule.min_predictions;
    report.classes = results.front().gaps.classes;
    report.filter = filter_classes(results, rule);

    // variants in first-appearance order, sizes ascending
    std::vector<std::string> variant_names;
    std::set<std::int64_t> size_set;
    for (const ReplicateResult& r : results) {
        if (std::find(variant_names.begin(), variant_names.end(), r.variant) ==
            variant_names.end())
            variant_names.push_back(r.variant);
        size_set.insert(r.size);
    }
    std::vector<std::int64_t> sizes(size_set.begin(), size_set.end());

    const auto& retained = report.filter.retained;

    for (const std::string& vname : variant_names) {
        VariantBlock vb;
        vb.variant = vname;
        for (std::int64_t size : sizes) {
            auto series = series_for(results, vname, size, retained);
            if (series.front().values.empty()) continue;  // variant lacks this size
            SizeBlock sb;
            sb.size = size;
            sb.replicate_count = (std::int64_t)series.front().values.size();
            std::size_t s = 0;
            for (MetricKind kind : kAllMetricKinds)
                for (const std::string& label : retained) {
                    GapCellSummary cell;
                    cell.kind = kind;
                    cell.label = label;
                    cell.summary = maybe_summary(series[s].values);
                    cell.replicate_count = (std::int64_t)series[s].values.size();
                    cell.undefined_count =
                        cell.replicate_count -
                        (std::int64_t)defined_of(series[s].values).size();
                    sb.gap_summaries.push_back(std::move(cell));
                    ++s;
                }
            sb.accuracy = maybe_summary(series[s].values);
            ++s;
            for (const std::string& label : retained) {
                sb.f1.emplace_back(label, maybe_summary(series[s].values));
                ++s;
            }
            vb.sizes.push_back(std::move(sb));
        }
        report.variants.push_back(std::move(vb));
    }

    // t-tests: every size pair within each variant, every variant pair
    // within each size; each quantity labeled. Only cells with >= 2 defined
    // observations on both sides are testable.
    auto run_tests = [&](const std::string& va, std::int64_t sa, const std::string& vb_name,
                         std::int64_t sb, std::vector<ComparisonTest>& sink) {
        auto series_a = series_for(results, va, sa, retained);
        auto series_b = series_for(results, vb_name, sb, retained);
        if (series_a.front().values.empty() || series_b.front().values.empty()) return;
        for (std::size_t s = 0; s < series_a.size(); ++s) {
            auto da = defined_of(series_a[s].values);
            auto db = defined_of(series_b[s].values);
            if (da.size() < 2 || db.size() < 2) continue;
            ComparisonTest ct;
            ct.quantity = series_a[s].quantity;
            ct.variant_a = va;
            ct.variant_b = vb_name;
            ct.size_a = sa;
            ct.size_b = sb;
            ct.n_a = (std::int64_t)da.size();
            ct.n_b = (std::int64_t)db.size();
            ct.test = t_test(da, db, variant, alpha);
            sink.push_back(std::move(ct));
        }
    };

    for (const std::string& vname : variant_names)
        for (std::size_t i = 0; i < sizes.size(); ++i)
            for (std::size_t j = i + 1; j < sizes.size(); ++j)
                run_tests(vname, sizes[i], vname, sizes[j], report.size_tests);

    for (std::int64_t size : sizes)
        for (std::size_t i = 0; i < variant_names.size(); ++i)
            for (std::size_t j = i + 1; j < variant_names.size(); ++j)
                run_tests(variant_names[i], size, variant_names[j], size, report.variant_tests);

    return report;
}

}  // namespace fairgauge
