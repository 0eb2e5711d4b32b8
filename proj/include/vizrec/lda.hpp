#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vizrec/tfidf.hpp"

namespace vizrec::models {

struct TopicDistribution {
    std::vector<double> probabilities;

    std::size_t argmax() const;
    bool operator==(const TopicDistribution&) const = default;
};

struct LdaModel {
    int k = 0;
    double alpha = 0.0;
    double beta = 0.0;
    Vocabulary vocabulary;
    std::vector<double> topic_word;  // k x |V| row-major, each row sums to 1
    std::uint64_t seed = 0;

    std::size_t vocab_size() const { return vocabulary.size(); }
    double phi(std::size_t topic, std::size_t word) const { return topic_word[topic * vocab_size() + word]; }

    /// Highest-probability word indices of one topic.
    std::vector<std::uint32_t> top_words(std::size_t topic, std::size_t n) const;
};

struct LdaOptions {
    int k = 150;
    double alpha = 0.0;  // <= 0 means 50 / k
    double beta = 0.01;
    int iterations = 1000;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;  // > 0 records training perplexity every N sweeps
};

struct LdaFit {
    LdaModel model;
    std::vector<TopicDistribution> training_theta;  // one per input document
    std::vector<double> perplexity_trace;
};

/// Collapsed Gibbs sampling with symmetric Dirichlet priors. The vocabulary is
/// every token in `docs`. Throws EmptyCorpus (no tokens) and InvalidK (k < 2).
LdaFit fit_lda(std::span<const text::Document> docs, const LdaOptions& options);

struct LdaInferOptions {
    int iterations = 200;
    double averaged_fraction = 0.2;  // theta is averaged over the final 20% of sweeps
};

/// Fold-in Gibbs sampling with the topic-word distributions held fixed.
/// Throws EmptyDocument when no token of `doc` is in the model vocabulary.
TopicDistribution lda_infer(const LdaModel& model, const text::Document& doc, std::uint64_t seed,
                            const LdaInferOptions& options = {});

}  // namespace vizrec::models
