#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vizrec/similarity.hpp"

namespace vizrec::config {

/// Everything a run needs. Serialized as a flat TOML-style document of
/// `key = value` lines; see `emit` for the key set.
struct RunConfig {
    std::string repo;
    std::string bundle;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string stopwords;     // empty: built-in list
    std::string word_vectors;  // empty: no embedding model

    // Index build.
    std::string facet_model = "lda-150";         // related + versions
    std::string similar_data_model = "lda-150";  // trained on column names only
    int lda_iterations = 1000;
    int lda_infer_iterations = 200;
    double lda_alpha = 0.0;  // <= 0 means 50 / k
    int neighbors_per_facet = 50;
    double related_low = 0.65;
    double related_high = 0.90;
    double versions_low = 0.90;
    double versions_high = 1.0;
    double similar_data_low = 0.90;
    double similar_data_high = 1.0;
    bool minhash = false;
    double minhash_threshold = 0.5;

    // Serving.
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string cors_origin = "*";

    // Evaluation.
    std::vector<std::string> models{"tfidf", "lsi-150", "lda-15", "lda-30", "lda-75", "lda-150"};
    std::string eval_unit = "all_text";  // all_text | sheet
    int triplets = 100;
    int strata_k = 15;
    std::string triplets_path;  // load instead of sampling when set
    std::string judgements;
    std::string gold;
    std::string exclusions;
    std::string report;

    bool operator==(const RunConfig&) const = default;

    similarity::FacetConfig facet(similarity::Facet f) const;
};

/// Throws InvalidConfig naming the line for syntax errors, unknown keys and
/// type mismatches.
RunConfig parse(std::string_view text);
RunConfig load(const std::filesystem::path& path);
std::string emit(const RunConfig& config);

/// Applies one `key=value` override using the file syntax for the value,
/// except that bare words are accepted as strings.
void set_value(RunConfig& config, std::string_view key, std::string_view value);

/// Throws InvalidConfig for thresholds outside [0, 1], low >= high, bad
/// counts, unknown model tags, and (when require_seed) a missing seed.
void validate(const RunConfig& config, bool require_seed);

}  // namespace vizrec::config
