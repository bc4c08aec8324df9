#include "fairgauge/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "fairgauge/rng.hpp"

namespace fairgauge {

namespace {

// Record indices grouped by (group, class) cell in vocabulary order; built
// once per source dataset and shared by every replicate.
struct StratifiedIndex {
    std::size_t n_classes = 0;
    std::vector<std::vector<std::uint32_t>> cells;  // group-major

    explicit StratifiedIndex(const AuditDataset& ds) {
        n_classes = ds.classes().size();
        cells.resize(ds.groups().size() * n_classes);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Record& r = ds.records()[i];
            auto g = ds.group_index(r.group);
            auto y = ds.class_index(r.true_class);
            cells[*g * n_classes + *y].push_back((std::uint32_t)i);
        }
    }

    std::vector<std::int64_t> counts() const {
        std::vector<std::int64_t> c(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) c[i] = (std::int64_t)cells[i].size();
        return c;
    }
};

// Floyd's algorithm: k distinct values out of [0, n), O(k) draws, no copy
// of the population. Returned sorted so downstream order is stable.
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k,
                                                      SplitMix64& rng) {
    std::unordered_set<std::uint32_t> chosen;
    chosen.reserve(k * 2);
    for (std::uint32_t j = n - k; j < n; ++j) {
        std::uint32_t t = (std::uint32_t)rng.bounded(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint32_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

AuditDataset subset(const AuditDataset& ds, const std::vector<std::uint32_t>& indices,
                    const std::string& name) {
    std::vector<Record> records;
    records.reserve(indices.size());
    for (std::uint32_t i : indices) records.push_back(ds.records()[i]);
    return AuditDataset::with_vocabularies(name, std::move(records), ds.groups(), ds.classes());
}

// sample_from_index / split_from_index share the cell-walk; both iterate
// cells in vocabulary order and consume the RNG in that fixed order.
std::vector<std::uint32_t> draw_stratified(const StratifiedIndex& index,
                                           const std::vector<std::int64_t>& allocation,
                                           SplitMix64& rng) {
    std::vector<std::uint32_t> picked;
    for (std::size_t c = 0; c < index.cells.size(); ++c) {
        std::int64_t want = allocation[c];
        if (want == 0) continue;
        const auto& members = index.cells[c];
        assert(want <= (std::int64_t)members.size());
        auto local = sample_without_replacement((std::uint32_t)members.size(),
                                                (std::uint32_t)want, rng);
        for (std::uint32_t j : local) picked.push_back(members[j]);
    }
    return picked;
}

AuditDataset sample_from_index(const AuditDataset& ds, const StratifiedIndex& index,
                               std::int64_t size, std::uint64_t seed) {
    if (size <= 0 || size > (std::int64_t)ds.size())
        throw std::invalid_argument("sample size " + std::to_string(size) +
                                    " out of range for dataset of " + std::to_string(ds.size()));
    auto allocation = largest_remainder_allocate(index.counts(), size);
    SplitMix64 rng(seed);
    auto picked = draw_stratified(index, allocation, rng);
    return subset(ds, picked, ds.name());
}

// Ratios are resolved in millionths so the allocation runs in exact
// integer arithmetic with deterministic ties.
constexpr std::int64_t kRatioScale = 1000000;

std::pair<AuditDataset, AuditDataset> split_impl(const AuditDataset& ds, double ratio,
                                                 std::uint64_t seed) {
    std::int64_t ppm = (std::int64_t)std::llround(ratio * (double)kRatioScale);
    if (ppm <= 0 || ppm >= kRatioScale)
        throw std::invalid_argument("split ratio must lie strictly between 0 and 1");

    StratifiedIndex index(ds);
    auto counts = index.counts();
    std::size_t n_cells = counts.size();

    // train total: nearest integer of ratio * n, half away from zero
    std::int64_t n = (std::int64_t)ds.size();
    std::int64_t train_total = (n * ppm + kRatioScale / 2) / kRatioScale;

    // per-cell largest remainder against quotas ratio * cell_count
    std::vector<std::int64_t> train_alloc(n_cells);
    std::vector<std::pair<std::int64_t, std::size_t>> remainders;  // (-remainder, cell)
    std::int64_t used = 0;
    for (std::size_t c = 0; c < n_cells; ++c) {
        std::int64_t num = counts[c] * ppm;
        train_alloc[c] = num / kRatioScale;
        used += train_alloc[c];
        remainders.push_back({-(num % kRatioScale), c});
    }
    std::stable_sort(remainders.begin(), remainders.end());
    for (std::int64_t k = 0; k < train_total - used; ++k) {
        std::size_t c = remainders[(std::size_t)k].second;
        assert(-remainders[(std::size_t)k].first > 0);
        train_alloc[c] += 1;
        assert(train_alloc[c] <= counts[c]);
    }

    SplitMix64 rng(seed);
    std::vector<char> in_train(ds.size(), 0);
    for (std::size_t c = 0; c < n_cells; ++c) {
        if (train_alloc[c] == 0) continue;
        const auto& members = index.cells[c];
        auto local = sample_without_replacement((std::uint32_t)members.size(),
                                                (std::uint32_t)train_alloc[c], rng);
        for (std::uint32_t j : local) in_train[members[j]] = 1;
    }

    std::vector<std::uint32_t> train_idx, test_idx;
    train_idx.reserve((std::size_t)train_total);
    test_idx.reserve(ds.size() - (std::size_t)train_total);
    for (std::uint32_t i = 0; i < (std::uint32_t)ds.size(); ++i)
        (in_train[i] ? train_idx : test_idx).push_back(i);

    return {subset(ds, train_idx, ds.name() + "/train"),
            subset(ds, test_idx, ds.name() + "/test")};
}

}  // namespace

std::vector<std::int64_t> largest_remainder_allocate(const std::vector<std::int64_t>& weights,
                                                     std::int64_t total) {
    std::int64_t weight_sum = std::accumulate(weights.begin(), weights.end(), (std::int64_t)0);
    if (weight_sum <= 0) throw std::invalid_argument("allocation weights sum to zero");
    if (total < 0 || total > weight_sum)
        throw std::invalid_argument("allocation total out of range");

    std::size_t n = weights.size();
    std::vector<std::int64_t> out(n);
    std::vector<std::pair<std::int64_t, std::size_t>> remainders;
    remainders.reserve(n);
    std::int64_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t num = total * weights[i];  // < 2^63 for every in-scope scale
        out[i] = num / weight_sum;
        used += out[i];
        remainders.push_back({-(num % weight_sum), i});
    }
    std::stable_sort(remainders.begin(), remainders.end());
    for (std::int64_t k = 0; k < total - used; ++k) {
        std::size_t i = remainders[(std::size_t)k].second;
        assert(-remainders[(std::size_t)k].first > 0);
        out[i] += 1;
        assert(out[i] <= weights[i]);
    }
    return out;
}

AuditDataset stratified_sample(const AuditDataset& ds, std::int64_t size, std::uint64_t seed) {
    StratifiedIndex index(ds);
    return sample_from_index(ds, index, size, seed);
}

std::pair<AuditDataset, AuditDataset> split(const AuditDataset& ds, double ratio,
                                            std::uint64_t seed) {
    return split_impl(ds, ratio, seed);
}

SamplingPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("plan file '" + path + "': " + e.what());
    }
    SamplingPlan plan;
    if (!doc.contains("sizes") || !doc["sizes"].is_array() || doc["sizes"].empty())
        throw std::runtime_error("plan file: 'sizes' must be a non-empty array");
    for (const auto& s : doc["sizes"]) {
        if (!s.is_number_integer() || s.get<std::int64_t>() <= 0)
            throw std::runtime_error("plan file: 'sizes' entries must be positive integers");
        plan.sizes.push_back(s.get<std::int64_t>());
    }
    if (doc.contains("replicates_per_size")) plan.replicates_per_size = doc["replicates_per_size"];
    if (doc.contains("split_ratio")) plan.split_ratio = doc["split_ratio"];
    if (doc.contains("master_seed")) plan.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (plan.replicates_per_size < 1)
        throw std::runtime_error("plan file: 'replicates_per_size' must be >= 1");
    if (!(plan.split_ratio > 0.0 && plan.split_ratio < 1.0))
        throw std::runtime_error("plan file: 'split_ratio' must lie strictly between 0 and 1");
    return plan;
}

void check_plan(const SamplingPlan& plan, std::size_t source_size) {
    if (plan.sizes.empty()) throw std::invalid_argument("plan has no sizes");
    for (std::int64_t s : plan.sizes)
        if (s <= 0 || s > (std::int64_t)source_size)
            throw std::invalid_argument("plan size " + std::to_string(s) +
                                        " out of range for dataset of " +
                                        std::to_string(source_size));
    if (plan.replicates_per_size < 1) throw std::invalid_argument("replicates_per_size < 1");
    if (!(plan.split_ratio > 0.0 && plan.split_ratio < 1.0))
        throw std::invalid_argument("split_ratio must lie strictly between 0 and 1");
}

Predictor identity_predictor() {
    return [](const AuditDataset&, const AuditDataset& test, const std::string&) {
        std::unordered_map<std::string, std::string> preds;
        preds.reserve(test.size());
        for (const Record& r : test.records()) preds.emplace(r.id, r.true_class);
        return preds;
    };
}

Predictor keep_predictor() {
    return [](const AuditDataset&, const AuditDataset& test, const std::string&) {
        std::unordered_map<std::string, std::string> preds;
        preds.reserve(test.size());
        for (const Record& r : test.records())
            if (r.predicted_class) preds.emplace(r.id, *r.predicted_class);
        return preds;
    };
}

Predictor subprocess_predictor(const std::string& command, const std::string& workdir) {
    return [command, workdir](const AuditDataset& train, const AuditDataset& test,
                              const std::string& tag) -> std::unordered_map<std::string, std::string> {
        namespace fs = std::filesystem;
        fs::path dir = fs::path(workdir) / (tag.empty() ? "adhoc" : tag);
        fs::create_directories(dir);
        fs::path train_path = dir / "train.jsonl";
        fs::path test_path = dir / "test.jsonl";
        fs::path preds_path = dir / "predictions.json";
        write_jsonl(train, train_path.string());
        write_jsonl(test, test_path.string());

        std::string cmd = command + " '" + train_path.string() + "' '" + test_path.string() +
                          "' '" + preds_path.string() + "'";
        int status = std::system(cmd.c_str());
        if (status != 0)
            throw std::runtime_error("predictor command failed (status " +
                                     std::to_string(status) + "): " + command);

        std::ifstream in(preds_path);
        if (!in) throw std::runtime_error("predictor wrote no predictions file");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("bad predictions file: ") + e.what());
        }
        if (!doc.is_object()) throw std::runtime_error("predictions file must be a JSON object");
        std::unordered_map<std::string, std::string> preds;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (!it.value().is_string())
                throw std::runtime_error("prediction for id '" + it.key() + "' must be a string");
            preds.emplace(it.key(), it.value().get<std::string>());
        }
        return preds;
    };
}

namespace {

struct ReplicateSlot {
    bool done = false;
    bool failed = false;
    ReplicateHandle handle;
    ReplicateError error;
};

struct PlanJob {
    std::int64_t size;
    int index;
};

}  // namespace

void run_plan(const SamplingPlan& plan, const AuditDataset& ds, const Predictor& predictor,
              const ReplicateSink& sink, const ReplicateErrorSink& on_error, int threads) {
    check_plan(plan, ds.size());
    StratifiedIndex index(ds);

    std::vector<PlanJob> jobs;
    for (std::int64_t size : plan.sizes)
        for (int i = 0; i < plan.replicates_per_size; ++i) jobs.push_back({size, i});

    auto make_replicate = [&](const PlanJob& job) {
        ReplicateHandle h;
        h.size = job.size;
        h.index = job.index;
        h.seed = derive_seed(plan.master_seed, (std::uint64_t)job.size, (std::uint64_t)job.index);
        AuditDataset sample =
            sample_from_index(ds, index, job.size, substream_seed(h.seed, 1));
        auto [train, test] = split_impl(sample, plan.split_ratio, substream_seed(h.seed, 2));
        std::string tag = "size" + std::to_string(job.size) + "_rep" + std::to_string(job.index);
        auto preds = predictor(train, test, tag);
        h.train = std::move(train);
        h.test = attach_predictions(test, preds);
        return h;
    };

    if (threads <= 1) {
        for (const PlanJob& job : jobs) {
            try {
                sink(make_replicate(job));
            } catch (const std::exception& e) {
                on_error({job.size, job.index, e.what()});
            }
        }
        return;
    }

    // Parallel execution with in-order delivery: workers fill slots, the
    // delivery pass advances over completed entries. max_inflight bounds
    // how far workers may run ahead of delivery, capping live datasets.
    std::size_t n_jobs = jobs.size();
    std::vector<ReplicateSlot> slots(n_jobs);
    std::mutex mu;
    std::condition_variable cv;
    std::size_t next_job = 0;
    std::size_t delivered = 0;
    std::size_t max_inflight = (std::size_t)threads + 2;

    auto worker = [&]() {
        while (true) {
            std::size_t my_job;
            {
                std::unique_lock<std::mutex> lock(mu);
                cv.wait(lock, [&] { return next_job >= n_jobs || next_job < delivered + max_inflight; });
                if (next_job >= n_jobs) return;
                my_job = next_job++;
            }
            ReplicateSlot slot;
            try {
                slot.handle = make_replicate(jobs[my_job]);
            } catch (const std::exception& e) {
                slot.failed = true;
                slot.error = {jobs[my_job].size, jobs[my_job].index, e.what()};
            }
            slot.done = true;
            {
                std::lock_guard<std::mutex> lock(mu);
                slots[my_job] = std::move(slot);
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);

    while (delivered < n_jobs) {
        ReplicateSlot slot;
        {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return slots[delivered].done; });
            slot = std::move(slots[delivered]);
            slots[delivered].done = false;
            ++delivered;
        }
        cv.notify_all();
        if (slot.failed)
            on_error(slot.error);
        else
            sink(std::move(slot.handle));
    }

    for (auto& t : pool) t.join();
}

std::vector<ReplicateHandle> run_plan(const SamplingPlan& plan, const AuditDataset& ds,
                                      const Predictor& predictor, int threads) {
    std::vector<ReplicateHandle> handles;
    std::vector<ReplicateError> errors;
    run_plan(
        plan, ds, predictor, [&](ReplicateHandle&& h) { handles.push_back(std::move(h)); },
        [&](const ReplicateError& e) { errors.push_back(e); }, threads);
    if (!errors.empty()) {
        std::string msg = "predictor failed on replicates:";
        for (const auto& e : errors)
            msg += " (size=" + std::to_string(e.size) + ", index=" + std::to_string(e.index) +
                   "): " + e.message + ";";
        throw std::runtime_error(msg);
    }
    return handles;
}

}  // namespace fairgauge
