// Shared hand-counted fixtures. Counts below were tallied by hand and
// cross-checked against the naive oracles before being frozen.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairgauge/dataset.hpp"

namespace fixtures {

using fairgauge::AuditDataset;
using fairgauge::Record;

inline Record rec(std::string id, std::string group, std::string truth,
                  std::optional<std::string> pred = std::nullopt,
                  std::optional<std::string> text = std::nullopt) {
    Record r;
    r.id = std::move(id);
    r.group = std::move(group);
    r.true_class = std::move(truth);
    r.predicted_class = std::move(pred);
    r.text = std::move(text);
    return r;
}

// 8 records, groups M/F, classes a/b. True cells:
//   (M,a)=3 (M,b)=1 (F,a)=2 (F,b)=2
// Predictions: M predicts a twice (both correct), F predicts a once
// (correct). 6 of 8 correct overall.
//   GP(M,a)=2/4  GP(F,a)=1/4  gap(M,F,a)=0.25
//   TPR(M,a)=2/3 TPR(F,a)=1/2 PP(M,a)=1 PP(F,a)=1
//   accuracy=0.75  F1(a): precision 3/3, recall 3/5 -> 0.75
inline AuditDataset eight_record_fixture() {
    std::vector<Record> records = {
        rec("m1", "M", "a", "a"), rec("m2", "M", "a", "a"), rec("m3", "M", "a", "b"),
        rec("m4", "M", "b", "b"), rec("f1", "F", "a", "a"), rec("f2", "F", "a", "b"),
        rec("f3", "F", "b", "b"), rec("f4", "F", "b", "b"),
    };
    return AuditDataset::from_records("eight", std::move(records));
}

// Females: 3 true-a records, 2 of them predicted a -> TPR(F,a) = 2/3.
inline AuditDataset tpr_fixture() {
    std::vector<Record> records = {
        rec("f1", "F", "a", "a"), rec("f2", "F", "a", "a"), rec("f3", "F", "a", "b"),
        rec("f4", "F", "b", "b"), rec("m1", "M", "a", "a"), rec("m2", "M", "b", "b"),
    };
    return AuditDataset::from_records("tpr", std::move(records));
}

// Males: 3 predicted-a records, 2 of them truly a -> PP(M,a) = 2/3.
inline AuditDataset pp_fixture() {
    std::vector<Record> records = {
        rec("m1", "M", "a", "a"), rec("m2", "M", "a", "a"), rec("m3", "M", "b", "a"),
        rec("m4", "M", "b", "b"), rec("f1", "F", "a", "a"), rec("f2", "F", "b", "b"),
    };
    return AuditDataset::from_records("pp", std::move(records));
}

// Class a: both true-a records predicted a (recall 1), plus two false
// positives (precision 0.5) -> F1(a) = 2/3.
inline AuditDataset f1_fixture() {
    std::vector<Record> records = {
        rec("r1", "M", "a", "a"), rec("r2", "F", "a", "a"), rec("r3", "M", "b", "a"),
        rec("r4", "F", "b", "a"), rec("r5", "M", "b", "b"), rec("r6", "F", "b", "b"),
    };
    return AuditDataset::from_records("f1", std::move(records));
}

// Symmetric under group swap: every (class, prediction) pattern appears
// once per group, so every gap is exactly 0.
inline AuditDataset symmetric_fixture() {
    std::vector<Record> records = {
        rec("m1", "M", "a", "a"), rec("m2", "M", "a", "b"), rec("m3", "M", "b", "b"),
        rec("m4", "M", "b", "a"), rec("f1", "F", "a", "a"), rec("f2", "F", "a", "b"),
        rec("f3", "F", "b", "b"), rec("f4", "F", "b", "a"),
    };
    return AuditDataset::from_records("symmetric", std::move(records));
}

// Identity predictions over a group-balanced 2x2 population; cells of 25
// records each so stratified allocations stay symmetric at sizes divisible
// by 4.
inline AuditDataset balanced_identity_fixture() {
    std::vector<Record> records;
    int n = 0;
    for (const char* g : {"M", "F"})
        for (const char* c : {"a", "b"})
            for (int i = 0; i < 25; ++i)
                records.push_back(rec("r" + std::to_string(n++), g, c, c));
    return AuditDataset::from_records("balanced", std::move(records));
}

}  // namespace fixtures
