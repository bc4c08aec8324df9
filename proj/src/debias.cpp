#include "fairgauge/debias.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fairgauge {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

std::string lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = (char)(c - 'A' + 'a');
    return out;
}

// Replacement keeps the original token's initial capital ("She" -> "He",
// "she" -> "he", "mary" -> "camille").
std::string match_case(const std::string& replacement, const std::string& original) {
    if (replacement.empty() || original.empty()) return replacement;
    std::string out = replacement;
    unsigned char first = (unsigned char)original[0];
    if (first >= 'A' && first <= 'Z') {
        if (out[0] >= 'a' && out[0] <= 'z') out[0] = (char)(out[0] - 'a' + 'A');
    } else if (first >= 'a' && first <= 'z') {
        if (out[0] >= 'A' && out[0] <= 'Z') out[0] = (char)(out[0] - 'A' + 'a');
    }
    return out;
}

void check_token(const std::string& token, const char* what) {
    if (token.empty()) throw std::runtime_error(std::string(what) + ": empty token");
    for (unsigned char c : token) {
        if (!is_word_byte(c))
            throw std::runtime_error(std::string(what) + " '" + token +
                                     "': must be a single word token");
        if (c >= 'A' && c <= 'Z')
            throw std::runtime_error(std::string(what) + " '" + token + "': must be lowercase");
    }
}

}  // namespace

DebiasConfig DebiasConfig::toward_male() {
    DebiasConfig c;
    c.target_gender = "M";
    c.indicator_map = {{"she", "he"},       {"her", "his"},   {"hers", "his"},
                       {"herself", "himself"}, {"mrs", "mr"}, {"ms", "mr"},
                       {"miss", "mr"}};
    c.name_lexicon = builtin_lexicon();
    return c;
}

DebiasConfig DebiasConfig::toward_female() {
    DebiasConfig c;
    c.target_gender = "F";
    c.indicator_map = {{"he", "she"},
                       {"his", "her"},
                       {"him", "her"},
                       {"himself", "herself"},
                       {"mr", "mrs"}};
    c.name_lexicon = builtin_lexicon();
    return c;
}

void DebiasReport::merge(const DebiasReport& other) {
    replaced_indicator_count += other.replaced_indicator_count;
    replaced_name_count += other.replaced_name_count;
    for (const auto& [token, n] : other.per_token) per_token[token] += n;
    missing_text_ids.insert(missing_text_ids.end(), other.missing_text_ids.begin(),
                            other.missing_text_ids.end());
}

std::pair<std::string, DebiasReport> neutralize(const std::string& text,
                                                const DebiasConfig& config) {
    if (config.neutral_name.empty())
        throw std::invalid_argument("debias config: neutral_name must be non-empty");
    std::string out;
    out.reserve(text.size());
    DebiasReport report;

    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = (unsigned char)text[i];
        if (!is_word_byte(c)) {
            out.push_back((char)c);
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && is_word_byte((unsigned char)text[i])) ++i;
        std::string token = text.substr(start, i - start);
        std::string key = lower_ascii(token);

        auto it = config.indicator_map.find(key);
        if (it != config.indicator_map.end()) {
            std::string replacement = match_case(it->second, token);
            if (replacement != token) {
                report.replaced_indicator_count += 1;
                report.per_token[key] += 1;
            }
            out += replacement;
        } else if (config.name_lexicon.count(key)) {
            std::string replacement = match_case(config.neutral_name, token);
            if (replacement != token) {
                report.replaced_name_count += 1;
                report.per_token[key] += 1;
            }
            out += replacement;
        } else {
            out += token;
        }
    }
    return {std::move(out), std::move(report)};
}

std::pair<AuditDataset, DebiasReport> neutralize_dataset(const AuditDataset& ds,
                                                         const DebiasConfig& config) {
    DebiasReport total;
    std::vector<Record> records = ds.records();
    for (Record& r : records) {
        if (!r.text) {
            total.missing_text_ids.push_back(r.id);
            continue;
        }
        auto [text, report] = neutralize(*r.text, config);
        r.text = std::move(text);
        total.merge(report);
    }
    return {AuditDataset::with_vocabularies(ds.name(), std::move(records), ds.groups(),
                                            ds.classes()),
            std::move(total)};
}

std::unordered_set<std::string> load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon '" + path + "'");
    std::unordered_set<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        names.insert(lower_ascii(line.substr(start)));
    }
    return names;
}

const std::unordered_set<std::string>& builtin_lexicon() {
    static const std::unordered_set<std::string> names = {
        "mary",    "bob",     "james",   "john",    "robert",  "michael", "william",
        "david",   "richard", "joseph",  "thomas",  "charles", "patricia", "jennifer",
        "linda",   "elizabeth", "barbara", "susan",  "jessica", "sarah",   "karen",
        "nancy",   "lisa",    "margaret", "betty",  "sandra",  "ashley",  "emily",
        "anna",    "alice",   "peter",   "paul",    "george",  "henry",   "frank",
        "emma",    "olivia",  "sophia",  "julia",   "laura"};
    return names;
}

std::map<std::string, std::string> load_indicator_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open indicator map '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("indicator map '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("indicator map must be a JSON object");
    std::map<std::string, std::string> map;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        check_token(it.key(), "indicator map key");
        if (!it.value().is_string())
            throw std::runtime_error("indicator map value for '" + it.key() +
                                     "' must be a string");
        std::string value = it.value().get<std::string>();
        check_token(lower_ascii(value), "indicator map value");
        map.emplace(it.key(), value);
    }
    return map;
}

}  // namespace fairgauge
