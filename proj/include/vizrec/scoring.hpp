#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vizrec/embedding.hpp"
#include "vizrec/text.hpp"

namespace vizrec::scoring {

enum class ModelKind { TfIdf, Lsi, Lda, Embedding };

// "tfidf", "lsi-<k>", "lda-<k>", "embedding".
struct ModelTag {
    ModelKind kind = ModelKind::TfIdf;
    int k = 0;

    std::string str() const;
    bool operator==(const ModelTag&) const = default;
};

std::optional<ModelTag> parse_model_tag(std::string_view tag);

/// Pairwise document similarity keyed by workbook id.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::string tag() const = 0;
    /// Throws UnknownWorkbook for ids outside the corpus, or the underlying
    /// model error (ZeroVector, EmptyDocument, NoKnownTokens) when a document
    /// has no representation.
    virtual double score(const std::string& a, const std::string& b) const = 0;
};

/// Wraps a plain function; handy for tests and derived scorers.
class FunctionScorer final : public Scorer {
public:
    using Fn = std::function<double(const std::string&, const std::string&)>;
    FunctionScorer(std::string tag, Fn fn) : tag_(std::move(tag)), fn_(std::move(fn)) {}
    std::string tag() const override { return tag_; }
    double score(const std::string& a, const std::string& b) const override { return fn_(a, b); }

private:
    std::string tag_;
    Fn fn_;
};

struct ScorerOptions {
    std::uint64_t seed = 0;
    int lda_iterations = 1000;
    int lda_infer_iterations = 200;
    double lda_alpha = 0.0;  // <= 0 means 50 / k
    unsigned workers = 1;
    const models::WordVectorTable* word_vectors = nullptr;  // required for "embedding"
};

/// Fits the tagged model on `corpus` and precomputes one representation per
/// document. Throws InvalidConfig when "embedding" is requested without word
/// vectors; model fitting errors propagate.
std::unique_ptr<Scorer> make_scorer(const ModelTag& tag, std::span<const text::Document> corpus,
                                    const ScorerOptions& options);

}  // namespace vizrec::scoring
