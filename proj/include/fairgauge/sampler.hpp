#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairgauge/dataset.hpp"

namespace fairgauge {

/// Multi-size, multi-replicate sampling protocol.
struct SamplingPlan {
    std::vector<std::int64_t> sizes;      // e.g. 10000, 20000, 50000, 120000
    int replicates_per_size = 50;
    double split_ratio = 0.7;             // train share
    std::uint64_t master_seed = 0;
};

/// Parses/validates a plan JSON file (keys sizes, replicates_per_size,
/// split_ratio, master_seed). Throws std::runtime_error with the offending
/// key on invalid input.
SamplingPlan load_plan(const std::string& path);
void check_plan(const SamplingPlan& plan, std::size_t source_size);

/// One replicate: a stratified sample of `size` records split into train
/// and test; seed is a pure function of (master_seed, size, index).
struct ReplicateHandle {
    std::int64_t size = 0;
    int index = 0;
    std::uint64_t seed = 0;
    AuditDataset train;
    AuditDataset test;
};

/// Largest-remainder (Hamilton) apportionment of `total` across cells in
/// proportion to weights; exact integer arithmetic, ties broken by cell
/// order. Quotas are total*weight[i]/weight_sum.
std::vector<std::int64_t> largest_remainder_allocate(const std::vector<std::int64_t>& weights,
                                                     std::int64_t total);

/// Stratified subsample preserving (group x class) cell proportions via
/// largest-remainder rounding; within a cell, records are chosen uniformly
/// without replacement. Deterministic under seed.
AuditDataset stratified_sample(const AuditDataset& ds, std::int64_t size, std::uint64_t seed);

/// Stratified train/test split; the train side gets the largest-remainder
/// allocation of round(ratio * n) records (ratio resolved at 1e-6). The two
/// sides are disjoint and exhaustive.
std::pair<AuditDataset, AuditDataset> split(const AuditDataset& ds, double ratio,
                                            std::uint64_t seed);

/// The pluggable predictor boundary: given a train set and a test set,
/// return id -> predicted class label for test records. The toolkit never
/// trains models; any classifier (or the synthetic oracle) plugs in here.
/// `tag` identifies the replicate ("size10000_rep003") so file-based
/// predictors can lay out their scratch space deterministically.
using Predictor = std::function<std::unordered_map<std::string, std::string>(
    const AuditDataset& train, const AuditDataset& test, const std::string& tag)>;

/// Predicts each test record's true class (a perfect classifier).
Predictor identity_predictor();

/// Uses the predictions already present on the test records (the synthetic
/// oracle path). Test records lacking one stay unpredicted.
Predictor keep_predictor();

/// Runs `command <train.jsonl> <test.jsonl> <predictions.json>` in
/// `workdir`; the predictions file must hold a JSON object mapping id to
/// class label. Each replicate gets its own subdirectory.
Predictor subprocess_predictor(const std::string& command, const std::string& workdir);

struct ReplicateError {
    std::int64_t size = 0;
    int index = 0;
    std::string message;
};

/// Called once per replicate, strictly in (size, index) order regardless of
/// parallelism. Exactly one of handle/error is meaningful per call.
using ReplicateSink = std::function<void(ReplicateHandle&& handle)>;
using ReplicateErrorSink = std::function<void(const ReplicateError& error)>;

/// Executes the full plan: for each (size, index), stratified-sample,
/// split, run the predictor on (train, test), attach predictions to the
/// test set, and hand the replicate to `sink` in deterministic order.
/// Predictor failures go to `on_error` with their coordinates; remaining
/// replicates are unaffected. `threads` <= 1 runs sequentially; results are
/// identical either way.
void run_plan(const SamplingPlan& plan, const AuditDataset& ds, const Predictor& predictor,
              const ReplicateSink& sink, const ReplicateErrorSink& on_error, int threads = 1);

/// Convenience form: collects all handles; throws std::runtime_error
/// listing coordinates if any replicate failed.
std::vector<ReplicateHandle> run_plan(const SamplingPlan& plan, const AuditDataset& ds,
                                      const Predictor& predictor, int threads = 1);

}  // namespace fairgauge
