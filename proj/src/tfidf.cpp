#include "vizrec/tfidf.hpp"

#include <cmath>
#include <map>

#include "vizrec/error.hpp"

namespace vizrec::models {

double SparseVector::norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double SparseVector::dot(const SparseVector& other) const {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < indices.size() && j < other.indices.size()) {
        if (indices[i] == other.indices[j]) {
            sum += values[i] * other.values[j];
            ++i;
            ++j;
        } else if (indices[i] < other.indices[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return sum;
}

std::vector<double> SparseVector::to_dense(std::size_t dim) const {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= dim) throw Error(ErrorCode::DimensionMismatch, "sparse index out of range");
        out[indices[i]] = values[i];
    }
    return out;
}

std::optional<std::uint32_t> Vocabulary::find(const std::string& token) const {
    if (auto it = index.find(token); it != index.end()) return it->second;
    return std::nullopt;
}

void Vocabulary::reindex() {
    index.clear();
    index.reserve(tokens.size());
    for (std::uint32_t i = 0; i < tokens.size(); ++i) index.emplace(tokens[i], i);
}

Vocabulary build_vocabulary(std::span<const text::Document> docs, int min_df) {
    if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from zero documents");
    std::map<std::string, int> df;
    for (const auto& doc : docs) {
        for (const auto& [token, count] : doc.counts) {
            if (count > 0) ++df[token];
        }
    }
    Vocabulary vocab;
    vocab.n_documents = static_cast<int>(docs.size());
    for (const auto& [token, n] : df) {
        if (n >= min_df) {
            vocab.tokens.push_back(token);
            vocab.document_frequency.push_back(n);
        }
    }
    vocab.reindex();
    return vocab;
}

TfIdfModel fit_tfidf(std::span<const text::Document> docs, int min_df) {
    TfIdfModel model;
    model.vocabulary = build_vocabulary(docs, min_df);
    const double n = model.vocabulary.n_documents;
    model.idf.reserve(model.vocabulary.size());
    for (int df : model.vocabulary.document_frequency) {
        model.idf.push_back(df == model.vocabulary.n_documents ? 0.0 : std::log(n / df));
    }
    return model;
}

SparseVector tfidf_weights(const TfIdfModel& model, const text::Document& doc) {
    // doc.counts is sorted by token and the vocabulary is lexicographic, so
    // indices come out increasing.
    SparseVector v;
    for (const auto& [token, count] : doc.counts) {
        const auto idx = model.vocabulary.find(token);
        if (!idx) continue;
        const double w = count * model.idf[*idx];
        if (w != 0.0) {
            v.indices.push_back(*idx);
            v.values.push_back(w);
        }
    }
    return v;
}

SparseVector tfidf_vector(const TfIdfModel& model, const text::Document& doc) {
    auto v = tfidf_weights(model, doc);
    const double n = v.norm();
    if (n > 0.0) {
        for (auto& x : v.values) x /= n;
    }
    return v;
}

}  // namespace vizrec::models
