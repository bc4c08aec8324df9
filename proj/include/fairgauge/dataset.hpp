#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fairgauge {

/// One labeled observation: a group attribute, a true class, an optional
/// predicted class and an optional free-text body.
struct Record {
    std::string id;
    std::string group;
    std::string true_class;
    std::optional<std::string> predicted_class;
    std::optional<std::string> text;
};

/// A validated collection of records plus the group and class vocabularies.
/// Treat instances as immutable after construction: every operation that
/// "modifies" a dataset returns a new value, so sharing across concurrent
/// readers is safe.
class AuditDataset {
public:
    AuditDataset() = default;

    /// Builds a dataset, deriving vocabularies in first-appearance order.
    /// Throws std::invalid_argument on empty labels or duplicate ids.
    static AuditDataset from_records(std::string name, std::vector<Record> records);

    /// Builds a dataset with explicit vocabularies (sampling and synthetic
    /// generation preserve their source ordering this way). Every record
    /// label must appear in the vocabularies.
    static AuditDataset with_vocabularies(std::string name, std::vector<Record> records,
                                          std::vector<std::string> groups,
                                          std::vector<std::string> classes);

    const std::string& name() const { return name_; }
    const std::vector<Record>& records() const { return records_; }
    const std::vector<std::string>& groups() const { return groups_; }
    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t size() const { return records_.size(); }

    std::optional<std::size_t> group_index(const std::string& label) const;
    std::optional<std::size_t> class_index(const std::string& label) const;

private:
    std::string name_;
    std::vector<Record> records_;
    std::vector<std::string> groups_;
    std::vector<std::string> classes_;
    std::unordered_map<std::string, std::size_t> group_lookup_;
    std::unordered_map<std::string, std::size_t> class_lookup_;

    void build_lookups();
};

enum class FileFormat { csv, jsonl };

/// Column-name mapping from file columns/keys to record fields.
/// group and true_class are mandatory; the rest optional. When no id column
/// is named, row numbers become ids ("row2", "row3", ... 1-based with the
/// CSV header on row 1; JSONL lines count from 1).
struct DatasetSchema {
    std::optional<std::string> id = "id";
    std::string group = "group";
    std::string true_class = "true_class";
    std::optional<std::string> predicted_class = "predicted_class";
    std::optional<std::string> text = "text";
};

/// Per-cell tallies and per-record problems found by validate().
struct ValidationIssue {
    std::string record_id;  // empty for dataset-level findings
    std::string problem;
};

struct CellCount {
    std::string group;
    std::string label;
    std::int64_t count = 0;
};

struct ValidationReport {
    std::int64_t record_count = 0;
    std::vector<CellCount> cell_counts;  // group-major, vocabulary order; sums to record_count
    std::vector<ValidationIssue> issues;
    std::int64_t missing_prediction_count = 0;

    std::int64_t cell(const std::string& group, const std::string& label) const;
};

/// Reads a CSV (RFC 4180, header row required) or JSONL file into a dataset.
/// Vocabularies are the distinct observed labels in first-appearance order.
/// Throws std::runtime_error naming the offending row/line on: unreadable
/// file, missing mandatory column, empty dataset, duplicate id.
AuditDataset load_dataset(const std::string& path, FileFormat format,
                          const DatasetSchema& schema = {});

/// Infers csv/jsonl from the file extension; throws if neither.
FileFormat format_from_path(const std::string& path);

/// Exact per-cell tallies plus issues (vocabulary problems, missing
/// predictions, empty cells). Never throws: problems are reported.
ValidationReport validate(const AuditDataset& ds);

/// Returns a copy of `ds` with predicted_class set for the given ids;
/// the input dataset is untouched. Throws on unknown id or class label.
AuditDataset attach_predictions(const AuditDataset& ds,
                                const std::unordered_map<std::string, std::string>& preds);

/// Canonical serialized form: JSONL, keys id, group, true_class,
/// predicted_class, text; absent optionals omitted.
void write_jsonl(const AuditDataset& ds, std::ostream& out);
void write_jsonl(const AuditDataset& ds, const std::string& path);

}  // namespace fairgauge
