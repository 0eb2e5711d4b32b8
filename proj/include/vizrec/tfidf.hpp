#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vizrec/text.hpp"

namespace vizrec::models {

/// One row of a document-term matrix: strictly increasing indices, nonzero values.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
    double norm() const;
    double dot(const SparseVector& other) const;
    std::vector<double> to_dense(std::size_t dim) const;

    bool operator==(const SparseVector&) const = default;
};

struct Vocabulary {
    std::vector<std::string> tokens;  // index -> token, lexicographic
    std::unordered_map<std::string, std::uint32_t> index;
    std::vector<int> document_frequency;
    int n_documents = 0;

    std::size_t size() const { return tokens.size(); }
    std::optional<std::uint32_t> find(const std::string& token) const;

    /// Rebuilds `index` from `tokens` (after deserialization).
    void reindex();
};

/// Tokens with document frequency >= min_df, indexed lexicographically.
/// Throws EmptyCorpus when docs is empty.
Vocabulary build_vocabulary(std::span<const text::Document> docs, int min_df = 1);

struct TfIdfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;  // ln(N / df); exactly 0 when a token is in every document
};

TfIdfModel fit_tfidf(std::span<const text::Document> docs, int min_df = 1);

/// count(t) * idf(t) over in-vocabulary tokens, L2-normalized. Zero-weight
/// entries are omitted, so the result is empty when nothing carries weight.
SparseVector tfidf_vector(const TfIdfModel& model, const text::Document& doc);

/// Unnormalized count * idf weights (used for tag aggregation).
SparseVector tfidf_weights(const TfIdfModel& model, const text::Document& doc);

}  // namespace vizrec::models
