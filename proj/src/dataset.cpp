#include "fairgauge/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace fairgauge {

namespace {

void require_label(const std::string& value, const char* field, const std::string& id) {
    if (value.empty())
        throw std::invalid_argument("record '" + id + "': " + field + " is empty");
}

}  // namespace

AuditDataset AuditDataset::from_records(std::string name, std::vector<Record> records) {
    AuditDataset ds;
    ds.name_ = std::move(name);
    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(records.size());
    for (const Record& r : records) {
        require_label(r.group, "group", r.id);
        require_label(r.true_class, "true_class", r.id);
        if (!seen_ids.insert(r.id).second)
            throw std::invalid_argument("duplicate id '" + r.id + "'");
        if (ds.group_lookup_.emplace(r.group, ds.groups_.size()).second)
            ds.groups_.push_back(r.group);
        if (ds.class_lookup_.emplace(r.true_class, ds.classes_.size()).second)
            ds.classes_.push_back(r.true_class);
        if (r.predicted_class &&
            ds.class_lookup_.emplace(*r.predicted_class, ds.classes_.size()).second)
            ds.classes_.push_back(*r.predicted_class);
    }
    ds.records_ = std::move(records);
    return ds;
}

AuditDataset AuditDataset::with_vocabularies(std::string name, std::vector<Record> records,
                                             std::vector<std::string> groups,
                                             std::vector<std::string> classes) {
    AuditDataset ds;
    ds.name_ = std::move(name);
    ds.groups_ = std::move(groups);
    ds.classes_ = std::move(classes);
    ds.build_lookups();
    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(records.size());
    for (const Record& r : records) {
        if (!ds.group_lookup_.count(r.group))
            throw std::invalid_argument("record '" + r.id + "': group '" + r.group +
                                        "' not in vocabulary");
        if (!ds.class_lookup_.count(r.true_class))
            throw std::invalid_argument("record '" + r.id + "': true_class '" + r.true_class +
                                        "' not in vocabulary");
        if (r.predicted_class && !ds.class_lookup_.count(*r.predicted_class))
            throw std::invalid_argument("record '" + r.id + "': predicted_class '" +
                                        *r.predicted_class + "' not in vocabulary");
        if (!seen_ids.insert(r.id).second)
            throw std::invalid_argument("duplicate id '" + r.id + "'");
    }
    ds.records_ = std::move(records);
    return ds;
}

void AuditDataset::build_lookups() {
    group_lookup_.clear();
    class_lookup_.clear();
    for (std::size_t i = 0; i < groups_.size(); ++i) group_lookup_.emplace(groups_[i], i);
    for (std::size_t i = 0; i < classes_.size(); ++i) class_lookup_.emplace(classes_[i], i);
}

std::optional<std::size_t> AuditDataset::group_index(const std::string& label) const {
    auto it = group_lookup_.find(label);
    if (it == group_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> AuditDataset::class_index(const std::string& label) const {
    auto it = class_lookup_.find(label);
    if (it == class_lookup_.end()) return std::nullopt;
    return it->second;
}

std::int64_t ValidationReport::cell(const std::string& group, const std::string& label) const {
    for (const CellCount& c : cell_counts)
        if (c.group == group && c.label == label) return c.count;
    return 0;
}

namespace {

// --- CSV (RFC 4180): quoted fields, "" escapes, newlines inside quotes ---

struct CsvReader {
    std::istream& in;
    bool eof = false;

    // Reads one row; returns false at end of input.
    bool next_row(std::vector<std::string>& fields, std::size_t& row_no, std::size_t& counter) {
        fields.clear();
        int c = in.get();
        if (c == EOF) return false;
        row_no = ++counter;
        std::string field;
        bool in_quotes = false;
        bool row_started = true;
        while (true) {
            if (c == EOF) {
                fields.push_back(std::move(field));
                return row_started;
            }
            char ch = (char)c;
            if (in_quotes) {
                if (ch == '"') {
                    int peek = in.peek();
                    if (peek == '"') {
                        field.push_back('"');
                        in.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"') {
                in_quotes = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\r') {
                if (in.peek() == '\n') in.get();
                fields.push_back(std::move(field));
                return true;
            } else if (ch == '\n') {
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
            }
            c = in.get();
        }
    }
};

void strip_bom(std::istream& in) {
    if (in.peek() == 0xEF) {
        char bom[3];
        in.read(bom, 3);
        if (in.gcount() != 3 || bom[1] != (char)0xBB || bom[2] != (char)0xBF) {
            in.clear();
            in.seekg(0);
        }
    }
}

std::vector<Record> load_csv_records(std::istream& in, const std::string& path,
                                     const DatasetSchema& schema) {
    strip_bom(in);
    CsvReader reader{in};
    std::vector<std::string> header;
    std::size_t row_no = 0, counter = 0;
    if (!reader.next_row(header, row_no, counter))
        throw std::runtime_error(path + ": empty dataset (no header row)");

    std::unordered_map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) columns.emplace(header[i], i);

    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = columns.find(name);
        if (it == columns.end()) return std::nullopt;
        return it->second;
    };
    auto require = [&](const std::string& name) {
        auto idx = find(name);
        if (!idx)
            throw std::runtime_error(path + ": missing mandatory column '" + name + "'");
        return *idx;
    };

    std::size_t group_col = require(schema.group);
    std::size_t class_col = require(schema.true_class);
    std::optional<std::size_t> id_col = schema.id ? find(*schema.id) : std::nullopt;
    std::optional<std::size_t> pred_col =
        schema.predicted_class ? find(*schema.predicted_class) : std::nullopt;
    std::optional<std::size_t> text_col = schema.text ? find(*schema.text) : std::nullopt;

    std::vector<Record> records;
    std::vector<std::string> fields;
    while (reader.next_row(fields, row_no, counter)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size())
            throw std::runtime_error(path + " row " + std::to_string(row_no) + ": has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        Record r;
        r.id = id_col ? fields[*id_col] : "row" + std::to_string(row_no);
        if (r.id.empty())
            throw std::runtime_error(path + " row " + std::to_string(row_no) + ": empty id");
        r.group = fields[group_col];
        r.true_class = fields[class_col];
        if (r.group.empty())
            throw std::runtime_error(path + " row " + std::to_string(row_no) +
                                     ": missing group value");
        if (r.true_class.empty())
            throw std::runtime_error(path + " row " + std::to_string(row_no) +
                                     ": missing true_class value");
        if (pred_col && !fields[*pred_col].empty()) r.predicted_class = fields[*pred_col];
        if (text_col && !fields[*text_col].empty()) r.text = fields[*text_col];
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<Record> load_jsonl_records(std::istream& in, const std::string& path,
                                       const DatasetSchema& schema) {
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object())
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected a JSON object");
        auto get_string = [&](const std::string& key,
                              bool allow_number) -> std::optional<std::string> {
            auto it = obj.find(key);
            if (it == obj.end() || it->is_null()) return std::nullopt;
            if (it->is_string()) return it->get<std::string>();
            if (allow_number && it->is_number_integer())
                return std::to_string(it->get<std::int64_t>());
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": key '" + key +
                                     "' must be a string");
        };
        Record r;
        auto id = schema.id ? get_string(*schema.id, true) : std::nullopt;
        r.id = id ? *id : "row" + std::to_string(line_no);
        auto group = get_string(schema.group, false);
        auto true_class = get_string(schema.true_class, false);
        if (!group || group->empty())
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": missing group value");
        if (!true_class || true_class->empty())
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": missing true_class value");
        r.group = *group;
        r.true_class = *true_class;
        if (schema.predicted_class) r.predicted_class = get_string(*schema.predicted_class, false);
        if (schema.text) r.text = get_string(*schema.text, false);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace

FileFormat format_from_path(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "csv") return FileFormat::csv;
    if (ext == "jsonl" || ext == "ndjson") return FileFormat::jsonl;
    throw std::runtime_error("cannot infer format from '" + path + "' (use .csv or .jsonl)");
}

AuditDataset load_dataset(const std::string& path, FileFormat format, const DatasetSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<Record> records = format == FileFormat::csv
                                      ? load_csv_records(in, path, schema)
                                      : load_jsonl_records(in, path, schema);
    if (records.empty()) throw std::runtime_error(path + ": empty dataset");
    try {
        return AuditDataset::from_records(path, std::move(records));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

ValidationReport validate(const AuditDataset& ds) {
    ValidationReport report;
    report.record_count = (std::int64_t)ds.size();

    const auto& groups = ds.groups();
    const auto& classes = ds.classes();
    std::vector<std::int64_t> counts(groups.size() * classes.size(), 0);

    for (const Record& r : ds.records()) {
        auto gi = ds.group_index(r.group);
        auto ci = ds.class_index(r.true_class);
        if (!gi || !ci) {
            report.issues.push_back({r.id, "label outside vocabulary"});
            continue;
        }
        counts[*gi * classes.size() + *ci] += 1;
        if (!r.predicted_class) {
            report.missing_prediction_count += 1;
            report.issues.push_back({r.id, "missing predicted_class"});
        } else if (!ds.class_index(*r.predicted_class)) {
            report.issues.push_back({r.id, "predicted_class '" + *r.predicted_class +
                                               "' outside vocabulary"});
        }
    }

    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t c = 0; c < classes.size(); ++c) {
            report.cell_counts.push_back({groups[g], classes[c], counts[g * classes.size() + c]});
            if (counts[g * classes.size() + c] == 0)
                report.issues.push_back(
                    {"", "empty cell (" + groups[g] + ", " + classes[c] + ")"});
        }

    if (groups.size() < 2) report.issues.push_back({"", "fewer than 2 groups"});
    if (classes.size() < 2) report.issues.push_back({"", "fewer than 2 classes"});
    return report;
}

AuditDataset attach_predictions(const AuditDataset& ds,
                                const std::unordered_map<std::string, std::string>& preds) {
    std::unordered_map<std::string, std::size_t> index_of;
    index_of.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) index_of.emplace(ds.records()[i].id, i);

    std::vector<Record> records = ds.records();
    for (const auto& [id, label] : preds) {
        auto it = index_of.find(id);
        if (it == index_of.end()) throw std::invalid_argument("unknown id '" + id + "'");
        if (!ds.class_index(label))
            throw std::invalid_argument("unknown class label '" + label + "'");
        records[it->second].predicted_class = label;
    }
    return AuditDataset::with_vocabularies(ds.name(), std::move(records), ds.groups(),
                                           ds.classes());
}

void write_jsonl(const AuditDataset& ds, std::ostream& out) {
    for (const Record& r : ds.records()) {
        nlohmann::json obj;
        obj["id"] = r.id;
        obj["group"] = r.group;
        obj["true_class"] = r.true_class;
        if (r.predicted_class) obj["predicted_class"] = *r.predicted_class;
        if (r.text) obj["text"] = *r.text;
        out << obj.dump() << '\n';
    }
}

void write_jsonl(const AuditDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_jsonl(ds, out);
}

}  // namespace fairgauge
