#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vizrec/ingest.hpp"

namespace vizrec::text {

enum class ProfileKind { AllText, ColumnsOnly, SheetPlusTitle };

struct FeatureProfile {
    ProfileKind kind = ProfileKind::AllText;
    std::string sheet_name;  // SheetPlusTitle only

    static FeatureProfile all_text() { return {ProfileKind::AllText, {}}; }
    static FeatureProfile columns_only() { return {ProfileKind::ColumnsOnly, {}}; }
    static FeatureProfile sheet_plus_title(std::string sheet) {
        return {ProfileKind::SheetPlusTitle, std::move(sheet)};
    }

    bool operator==(const FeatureProfile&) const = default;
};

std::string to_string(const FeatureProfile& profile);

/// Bag of normalized tokens for one workbook under one profile.
struct Document {
    std::string workbook_id;
    FeatureProfile profile;
    std::map<std::string, int> counts;  // ordered, so iteration is deterministic
    int total_tokens = 0;
    int unique_tokens = 0;

    bool empty() const { return counts.empty(); }
    bool operator==(const Document&) const = default;

    /// Builds a document straight from counts; keeps the totals consistent.
    static Document from_counts(std::string id, std::map<std::string, int> counts,
                                FeatureProfile profile = FeatureProfile::all_text());
};

class StopWordList {
public:
    StopWordList() = default;
    StopWordList(const std::vector<std::string>& entries, std::string source_path);

    /// Shipped defaults: common English stop words plus BI-tool boilerplate.
    static StopWordList defaults();

    /// One entry per line, '#' starts a comment, blank lines ignored.
    static StopWordList load(const std::filesystem::path& path);

    bool contains_token(std::string_view token) const { return tokens_.count(std::string(token)) > 0; }
    const std::vector<std::string>& phrases() const { return phrases_; }
    const std::string& source_path() const { return source_path_; }
    std::size_t size() const { return tokens_.size() + phrases_.size(); }

    /// Removes every phrase entry from `raw` (case-insensitive, whole words).
    std::string strip_phrases(std::string_view raw) const;

    /// Entries in load order normalized to lowercase; used for bundle export.
    std::vector<std::string> entries() const;

private:
    std::set<std::string> tokens_;
    std::vector<std::string> phrases_;  // multi-word entries, lowercase
    std::string source_path_;
};

/// Splits on non-alphabetic code points, lowercases, drops tokens shorter
/// than three code points. Input is treated as UTF-8.
std::vector<std::string> tokenize(std::string_view raw);

class Normalizer {
public:
    virtual ~Normalizer() = default;
    virtual std::string normalize(std::string_view token) const = 0;
};

/// Rule-based English suffix stripping: plural -s/-es, -ies -> y, -ing/-ed with
/// doubled-consonant repair. Rules are applied until a fixed point, so the
/// result is idempotent.
class SuffixNormalizer final : public Normalizer {
public:
    std::string normalize(std::string_view token) const override;
};

std::string normalize_token(std::string_view token);

/// Collects text for `profile`, strips phrase stops, tokenizes, normalizes and
/// drops token stops. Throws UnknownSheet for a SheetPlusTitle profile naming
/// a sheet the workbook does not have.
Document build_document(const ingest::RawWorkbook& wb, const FeatureProfile& profile,
                        const StopWordList& stops, const Normalizer& normalizer);
Document build_document(const ingest::RawWorkbook& wb, const FeatureProfile& profile,
                        const StopWordList& stops);

/// Same pipeline over free text (search queries).
Document document_from_text(std::string id, std::string_view raw, const StopWordList& stops);

/// Raw strings a profile draws from, in extraction order.
std::vector<std::string> profile_strings(const ingest::RawWorkbook& wb, const FeatureProfile& profile);

inline constexpr int kMinRelevantTokens = 10;

inline bool eligible_for_recommendation(const Document& doc) {
    return doc.total_tokens >= kMinRelevantTokens;
}

}  // namespace vizrec::text
