#include "vizrec/text.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "vizrec/error.hpp"

namespace vizrec::text {

extern const char* const kDefaultStopWords;

std::string to_string(const FeatureProfile& profile) {
    switch (profile.kind) {
    case ProfileKind::AllText: return "all_text";
    case ProfileKind::ColumnsOnly: return "columns_only";
    case ProfileKind::SheetPlusTitle: return "sheet_plus_title:" + profile.sheet_name;
    }
    return "unknown";
}

Document Document::from_counts(std::string id, std::map<std::string, int> counts, FeatureProfile profile) {
    Document doc;
    doc.workbook_id = std::move(id);
    doc.profile = std::move(profile);
    for (const auto& [token, n] : counts) {
        if (n > 0) {
            doc.counts.emplace(token, n);
            doc.total_tokens += n;
        }
    }
    doc.unique_tokens = static_cast<int>(doc.counts.size());
    return doc;
}

namespace {

struct CodePoint {
    std::uint32_t value;
    std::size_t length;
};

// Invalid sequences decode as U+FFFD, one byte at a time.
CodePoint decode_utf8(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else return {0xFFFD, 1};
    if (i + len > s.size()) return {0xFFFD, 1};
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len};
}

void encode_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Letters: ASCII, Latin-1/Latin Extended letters, and the main alphabetic and
// ideographic blocks. Digits, punctuation, symbols and separators are not.
bool is_letter(std::uint32_t cp) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x370 && cp <= 0x1FFF) return !(cp >= 0x660 && cp <= 0x669);  // skip Arabic-Indic digits
    if (cp >= 0x3040 && cp <= 0x9FFF) return true;
    if (cp >= 0xAC00 && cp <= 0xD7AF) return true;
    return false;
}

std::uint32_t to_lower(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                  // Cyrillic
    return cp;
}

bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = ascii_lower(c);
    return out;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Repairs "stopp" -> "stop", "runn" -> "run"; ll/ss/zz are legitimate endings.
std::string undouble(std::string stem) {
    const auto n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z') {
        stem.pop_back();
    }
    return stem;
}

bool is_ascii_word(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

// One rule application; returns the input unchanged when no rule fires.
std::string apply_rule(const std::string& t) {
    const auto n = t.size();
    if (n <= 3 || !is_ascii_word(t)) return t;

    if (ends_with(t, "ies") && n > 4) {
        if (t == "series" || t == "species") return t;
        return t.substr(0, n - 3) + "y";
    }
    if (ends_with(t, "sses")) return t.substr(0, n - 2);
    if (ends_with(t, "xes") || ends_with(t, "ches") || ends_with(t, "shes") || ends_with(t, "zzes")) {
        return t.substr(0, n - 2);
    }
    if (t.back() == 's' && !ends_with(t, "ss") && !ends_with(t, "us") && !ends_with(t, "is")) {
        return t.substr(0, n - 1);
    }
    if (ends_with(t, "ing")) {
        std::string stem = t.substr(0, n - 3);
        if (stem.size() >= 3 && has_vowel(stem)) {
            stem = undouble(std::move(stem));
            if (stem.size() >= 3) return stem;
        }
        return t;
    }
    if (ends_with(t, "ed") && !ends_with(t, "eed")) {
        std::string stem = t.substr(0, n - 2);
        if (stem.size() >= 3 && has_vowel(stem)) {
            stem = undouble(std::move(stem));
            if (stem.size() >= 3) return stem;
        }
    }
    return t;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t current_len = 0;
    auto flush = [&] {
        if (current_len >= 3) tokens.push_back(current);
        current.clear();
        current_len = 0;
    };
    for (std::size_t i = 0; i < raw.size();) {
        const auto cp = decode_utf8(raw, i);
        i += cp.length;
        if (is_letter(cp.value)) {
            encode_utf8(current, to_lower(cp.value));
            ++current_len;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string SuffixNormalizer::normalize(std::string_view token) const {
    std::string current(token);
    for (;;) {
        auto next = apply_rule(current);
        if (next == current) return current;
        current = std::move(next);
    }
}

std::string normalize_token(std::string_view token) { return SuffixNormalizer{}.normalize(token); }

StopWordList::StopWordList(const std::vector<std::string>& entries, std::string source_path)
    : source_path_(std::move(source_path)) {
    const SuffixNormalizer normalizer;
    for (const auto& raw : entries) {
        const auto entry = lower_ascii(raw);
        if (entry.empty()) continue;
        const bool plain = std::all_of(entry.begin(), entry.end(), [](char c) { return c >= 'a' && c <= 'z'; });
        if (plain) {
            tokens_.insert(entry);
            tokens_.insert(normalizer.normalize(entry));
        } else if (entry.find(' ') != std::string::npos) {
            if (std::find(phrases_.begin(), phrases_.end(), entry) == phrases_.end()) phrases_.push_back(entry);
        } else {
            // "n/a", "don't": match on the raw string, and on whatever tokens remain.
            if (std::find(phrases_.begin(), phrases_.end(), entry) == phrases_.end()) phrases_.push_back(entry);
        }
    }
    // Longest phrases first so "measure names" wins over a shorter overlapping entry.
    std::stable_sort(phrases_.begin(), phrases_.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

namespace {

std::vector<std::string> parse_stop_lines(std::istream& in) {
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        if (start < line.size()) entries.push_back(line.substr(start));
    }
    return entries;
}

}  // namespace

StopWordList StopWordList::defaults() {
    std::istringstream in(kDefaultStopWords);
    return StopWordList(parse_stop_lines(in), "<builtin>");
}

StopWordList StopWordList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read stop list " + path.string());
    auto entries = parse_stop_lines(in);
    if (entries.empty()) throw Error(ErrorCode::IoError, "stop list " + path.string() + " has no entries");
    return StopWordList(entries, path.string());
}

std::vector<std::string> StopWordList::entries() const {
    std::vector<std::string> out(tokens_.begin(), tokens_.end());
    out.insert(out.end(), phrases_.begin(), phrases_.end());
    return out;
}

std::string StopWordList::strip_phrases(std::string_view raw) const {
    std::string text(raw);
    if (phrases_.empty()) return text;
    for (const auto& phrase : phrases_) {
        std::string lowered = lower_ascii(text);
        std::size_t pos = 0;
        while ((pos = lowered.find(phrase, pos)) != std::string::npos) {
            const auto end = pos + phrase.size();
            const bool left_ok = pos == 0 || !is_ascii_alnum(lowered[pos - 1]);
            const bool right_ok = end == lowered.size() || !is_ascii_alnum(lowered[end]);
            if (left_ok && right_ok) {
                text.replace(pos, phrase.size(), std::string(phrase.size(), ' '));
                lowered.replace(pos, phrase.size(), std::string(phrase.size(), ' '));
            }
            pos = end;
        }
    }
    return text;
}

std::vector<std::string> profile_strings(const ingest::RawWorkbook& wb, const FeatureProfile& profile) {
    std::vector<std::string> out;
    auto add_columns = [&] {
        for (const auto& ds : wb.datasources) {
            out.insert(out.end(), ds.column_captions.begin(), ds.column_captions.end());
        }
    };
    auto add_sheet = [&](const ingest::SheetRecord& sheet) {
        out.push_back(sheet.sheet_name);
        for (const auto& f : sheet.text_fields) out.push_back(f.text);
    };
    switch (profile.kind) {
    case ProfileKind::AllText:
        out.push_back(wb.title);
        for (const auto& sheet : wb.sheets) add_sheet(sheet);
        add_columns();
        break;
    case ProfileKind::ColumnsOnly:
        add_columns();
        break;
    case ProfileKind::SheetPlusTitle: {
        const auto* sheet = wb.find_sheet(profile.sheet_name);
        if (!sheet) {
            throw Error(ErrorCode::UnknownSheet,
                        "workbook " + wb.id + " has no sheet named '" + profile.sheet_name + "'");
        }
        out.push_back(wb.title);
        add_sheet(*sheet);
        break;
    }
    }
    return out;
}

namespace {

void accumulate(std::map<std::string, int>& counts, std::string_view raw, const StopWordList& stops,
                const Normalizer& normalizer) {
    for (const auto& token : tokenize(stops.strip_phrases(raw))) {
        if (stops.contains_token(token)) continue;
        auto normal = normalizer.normalize(token);
        if (normal.size() < 3 || stops.contains_token(normal)) continue;
        ++counts[std::move(normal)];
    }
}

}  // namespace

Document build_document(const ingest::RawWorkbook& wb, const FeatureProfile& profile,
                        const StopWordList& stops, const Normalizer& normalizer) {
    std::map<std::string, int> counts;
    for (const auto& raw : profile_strings(wb, profile)) accumulate(counts, raw, stops, normalizer);
    return Document::from_counts(wb.id, std::move(counts), profile);
}

Document document_from_text(std::string id, std::string_view raw, const StopWordList& stops) {
    std::map<std::string, int> counts;
    accumulate(counts, raw, stops, SuffixNormalizer{});
    return Document::from_counts(std::move(id), std::move(counts));
}

Document build_document(const ingest::RawWorkbook& wb, const FeatureProfile& profile,
                        const StopWordList& stops) {
    return build_document(wb, profile, stops, SuffixNormalizer{});
}

}  // namespace vizrec::text
