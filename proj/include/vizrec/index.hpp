#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vizrec/config.hpp"
#include "vizrec/ingest.hpp"
#include "vizrec/similarity.hpp"
#include "vizrec/tfidf.hpp"

namespace vizrec::service {

inline constexpr int kBundleFormatVersion = 1;

struct WorkbookMeta {
    std::string id;
    std::string title;
    std::string author;
    std::string modified_date;
    std::string language;
    std::string source_path;
    int n_views = 0;
    int n_dashboards = 0;
    int n_columns = 0;
    bool has_marks = false;
    int total_tokens = 0;  // all-text document
    int unique_tokens = 0;
    bool eligible = false;
    std::string exclusion;  // "", "no_marks", "non_english", "too_few_words"
    std::string glyph;        // placeholder thumbnail initials
    std::string glyph_color;  // "#rrggbb"

    nlohmann::json to_json() const;
    static WorkbookMeta from_json(const nlohmann::json& j);
    bool operator==(const WorkbookMeta&) const = default;
};

struct TagEntry {
    std::string tag;
    double weight = 0.0;
    std::vector<std::string> workbook_ids;
};

inline constexpr std::size_t kTagCount = 30;

/// In-memory view of a bundle directory. Immutable once loaded.
class Bundle {
public:
    static Bundle load(const std::filesystem::path& dir);

    const std::vector<WorkbookMeta>& workbooks() const { return workbooks_; }
    const WorkbookMeta* find(const std::string& id) const;
    const WorkbookMeta& at(const std::string& id) const;  // throws UnknownWorkbook

    /// Precomputed list; empty when the workbook has none in this facet.
    const std::vector<similarity::Neighbor>& neighbors(const std::string& id, similarity::Facet facet) const;
    const similarity::FacetConfig& facet(similarity::Facet f) const { return facets_.at(f); }

    const std::vector<similarity::DuplicateGroup>& groups() const { return groups_; }
    const similarity::DuplicateGroup* group_of(const std::string& id) const;

    const std::vector<TagEntry>& tags() const { return tags_; }
    /// Workbook ids whose all-text document contains `token` after
    /// normalization (ascending).
    std::vector<std::string> workbooks_with_token(const std::string& token) const;

    const models::TfIdfModel& tfidf() const { return tfidf_; }
    const text::StopWordList& stopwords() const { return stopwords_; }
    const std::vector<text::Document>& documents() const { return documents_; }
    const models::SparseVector* tfidf_vector(const std::string& id) const;
    const nlohmann::json& manifest() const { return manifest_; }

private:
    std::vector<WorkbookMeta> workbooks_;
    std::unordered_map<std::string, std::size_t> index_;
    std::map<similarity::Facet, similarity::FacetConfig> facets_;
    std::map<std::pair<std::string, similarity::Facet>, std::vector<similarity::Neighbor>> neighbors_;
    std::vector<similarity::DuplicateGroup> groups_;
    std::unordered_map<std::string, std::size_t> group_index_;
    std::vector<TagEntry> tags_;
    std::map<std::string, std::vector<std::string>> inverted_;
    models::TfIdfModel tfidf_;
    text::StopWordList stopwords_;
    std::vector<text::Document> documents_;  // all-text, metadata order
    std::unordered_map<std::string, models::SparseVector> vectors_;
    nlohmann::json manifest_;
};

struct BuildReport {
    std::size_t files_seen = 0;
    std::size_t parsed = 0;
    std::size_t eligible = 0;
    std::map<std::string, std::size_t> excluded;  // rule -> count
    std::vector<ingest::LoadIssue> issues;
    std::vector<std::string> warnings;
    std::size_t groups = 0;
    std::map<std::string, std::size_t> neighbor_counts;  // facet -> total entries

    bool success = true;
    std::string failure;

    nlohmann::json to_json() const;
};

/// ingest -> documents -> models -> all-pairs facet scores -> neighbor lists,
/// groups, tags and inverted index, written under `out_dir` (created or
/// replaced). Upstream failures are collected in the report. The build fails
/// (success = false, nothing written) when no workbook is eligible or a
/// model cannot be fitted; config and I/O errors throw. Output bytes depend on
/// nothing but the repository contents and `config`.
BuildReport build_index(const config::RunConfig& config, const std::filesystem::path& out_dir);

struct SearchHit {
    std::string id;
    double score = 0.0;
    bool author_match = false;
};

/// TF-IDF cosine of the normalized query bag against every workbook;
/// workbooks whose author starts with the query (case-insensitive) come
/// first. Zero-score, non-author hits are dropped. Ties by id.
std::vector<SearchHit> search(const Bundle& bundle, const std::string& query, std::size_t limit);

struct Recommendation {
    const WorkbookMeta* workbook = nullptr;
    double score = 0.0;
};

struct RecommendationPage {
    std::size_t total = 0;
    std::vector<Recommendation> items;
};

/// Slice [offset, offset + limit) of the precomputed list. Throws
/// UnknownWorkbook.
RecommendationPage recommend(const Bundle& bundle, const std::string& id, similarity::Facet facet, std::size_t limit,
                             std::size_t offset = 0);

}  // namespace vizrec::service
