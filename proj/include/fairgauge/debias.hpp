#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fairgauge/dataset.hpp"

namespace fairgauge {

/// Gender-indicator rewrite configuration. indicator_map keys must be
/// lowercase single tokens; values are the replacement forms of the target
/// gender. All first names in the lexicon become neutral_name.
struct DebiasConfig {
    std::string target_gender;                        // display label ("M"/"F")
    std::map<std::string, std::string> indicator_map; // lowercase token -> token
    std::unordered_set<std::string> name_lexicon;     // lowercase first names
    std::string neutral_name = "Camille";

    /// she->he, her/hers->his, herself->himself, mrs/ms/miss->mr.
    static DebiasConfig toward_male();
    /// he->she, his->her, him->her, himself->herself, mr->mrs.
    static DebiasConfig toward_female();
};

struct DebiasReport {
    std::int64_t replaced_indicator_count = 0;
    std::int64_t replaced_name_count = 0;
    std::map<std::string, std::int64_t> per_token;  // lowercase original -> count
    std::vector<std::string> missing_text_ids;      // records passed through unchanged

    void merge(const DebiasReport& other);
};

/// Rewrites whole-word, case-insensitive matches: indicator_map keys to
/// their mapped forms, lexicon names to neutral_name. The original token's
/// initial capitalization is preserved; every other byte is untouched.
/// Tokens are maximal runs of ASCII alphanumerics or non-ASCII bytes, so
/// "his" inside "history" never matches and apostrophes split ("she's").
std::pair<std::string, DebiasReport> neutralize(const std::string& text,
                                                const DebiasConfig& config);

/// Applies neutralize to every record's text; ids and labels unchanged.
/// Records without text are flagged in the report and passed through.
std::pair<AuditDataset, DebiasReport> neutralize_dataset(const AuditDataset& ds,
                                                         const DebiasConfig& config);

/// One name per line, UTF-8, '#' comments, blank lines ignored; names are
/// lowercased for matching.
std::unordered_set<std::string> load_lexicon(const std::string& path);

/// Small bundled list for tests and smoke runs.
const std::unordered_set<std::string>& builtin_lexicon();

/// JSON object token -> token; keys must be lowercase single tokens.
/// Throws std::runtime_error naming the bad key otherwise.
std::map<std::string, std::string> load_indicator_map(const std::string& path);

}  // namespace fairgauge
