#include "vizrec/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"

namespace vizrec::models {

std::size_t TopicDistribution::argmax() const {
    return static_cast<std::size_t>(
        std::distance(probabilities.begin(), std::max_element(probabilities.begin(), probabilities.end())));
}

std::vector<std::uint32_t> LdaModel::top_words(std::size_t topic, std::size_t n) const {
    std::vector<std::uint32_t> idx(vocab_size());
    std::iota(idx.begin(), idx.end(), 0u);
    n = std::min(n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          const double pa = phi(topic, a), pb = phi(topic, b);
                          return pa != pb ? pa > pb : a < b;
                      });
    idx.resize(n);
    return idx;
}

namespace {

// Picks an index from unnormalized cumulative weights.
std::size_t sample_cumulative(const std::vector<double>& cumulative, double u) {
    const double target = u * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::min(static_cast<std::size_t>(std::distance(cumulative.begin(), it)), cumulative.size() - 1);
}

void normalize_in_place(std::span<double> row) {
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& x : row) x /= sum;
}

struct Corpus {
    std::vector<std::vector<std::uint32_t>> words;  // token occurrences per document
    std::size_t n_tokens = 0;
};

Corpus expand(std::span<const text::Document> docs, const Vocabulary& vocab) {
    Corpus c;
    c.words.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& [token, count] : docs[d].counts) {
            if (auto idx = vocab.find(token)) {
                c.words[d].insert(c.words[d].end(), static_cast<std::size_t>(count), *idx);
            }
        }
        c.n_tokens += c.words[d].size();
    }
    return c;
}

}  // namespace

LdaFit fit_lda(std::span<const text::Document> docs, const LdaOptions& options) {
    if (options.k < 2) throw Error(ErrorCode::InvalidK, "LDA needs at least two topics");
    if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "LDA needs at least one document");

    const auto K = static_cast<std::size_t>(options.k);
    const double alpha = options.alpha > 0.0 ? options.alpha : 50.0 / options.k;
    const double beta = options.beta;

    LdaFit fit;
    LdaModel& model = fit.model;
    model.k = options.k;
    model.alpha = alpha;
    model.beta = beta;
    model.seed = options.seed;
    model.vocabulary = build_vocabulary(docs, 1);
    const std::size_t V = model.vocabulary.size();
    const Corpus corpus = expand(docs, model.vocabulary);
    if (corpus.n_tokens == 0) throw Error(ErrorCode::EmptyCorpus, "LDA corpus has no tokens");
    const double v_beta = static_cast<double>(V) * beta;

    std::vector<int> doc_topic(docs.size() * K, 0);
    std::vector<int> word_topic(V * K, 0);
    std::vector<int> topic_total(K, 0);
    std::vector<std::vector<std::uint32_t>> z(docs.size());

    Rng rng(options.seed);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        z[d].resize(corpus.words[d].size());
        for (std::size_t i = 0; i < corpus.words[d].size(); ++i) {
            const auto t = static_cast<std::uint32_t>(rng.below(K));
            z[d][i] = t;
            ++doc_topic[d * K + t];
            ++word_topic[corpus.words[d][i] * K + t];
            ++topic_total[t];
        }
    }

    auto perplexity = [&] {
        double log_lik = 0.0;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const double norm = static_cast<double>(corpus.words[d].size()) + K * alpha;
            for (auto w : corpus.words[d]) {
                double p = 0.0;
                for (std::size_t t = 0; t < K; ++t) {
                    p += (doc_topic[d * K + t] + alpha) / norm * (word_topic[w * K + t] + beta) /
                         (topic_total[t] + v_beta);
                }
                log_lik += std::log(p);
            }
        }
        return std::exp(-log_lik / static_cast<double>(corpus.n_tokens));
    };

    std::vector<double> cumulative(K);
    if (options.checkpoint_every > 0) fit.perplexity_trace.push_back(perplexity());
    for (int sweep = 1; sweep <= options.iterations; ++sweep) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            int* nd = &doc_topic[d * K];
            for (std::size_t i = 0; i < corpus.words[d].size(); ++i) {
                const auto w = corpus.words[d][i];
                int* nw = &word_topic[w * K];
                auto t = z[d][i];
                --nd[t];
                --nw[t];
                --topic_total[t];
                double acc = 0.0;
                for (std::size_t j = 0; j < K; ++j) {
                    acc += (nd[j] + alpha) * (nw[j] + beta) / (topic_total[j] + v_beta);
                    cumulative[j] = acc;
                }
                t = static_cast<std::uint32_t>(sample_cumulative(cumulative, rng.uniform()));
                z[d][i] = t;
                ++nd[t];
                ++nw[t];
                ++topic_total[t];
            }
        }
        if (options.checkpoint_every > 0 && sweep % options.checkpoint_every == 0) {
            fit.perplexity_trace.push_back(perplexity());
            spdlog::debug("lda k={} sweep {} perplexity {:.3f}", K, sweep, fit.perplexity_trace.back());
        }
    }

    model.topic_word.assign(K * V, 0.0);
    for (std::size_t t = 0; t < K; ++t) {
        const double denom = topic_total[t] + v_beta;
        for (std::size_t w = 0; w < V; ++w) model.topic_word[t * V + w] = (word_topic[w * K + t] + beta) / denom;
        normalize_in_place(std::span<double>(model.topic_word).subspan(t * V, V));
    }

    fit.training_theta.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto& theta = fit.training_theta[d].probabilities;
        theta.resize(K);
        const double norm = static_cast<double>(corpus.words[d].size()) + K * alpha;
        for (std::size_t t = 0; t < K; ++t) theta[t] = (doc_topic[d * K + t] + alpha) / norm;
        normalize_in_place(theta);
    }
    return fit;
}

TopicDistribution lda_infer(const LdaModel& model, const text::Document& doc, std::uint64_t seed,
                            const LdaInferOptions& options) {
    const auto K = static_cast<std::size_t>(model.k);
    const std::size_t V = model.vocab_size();
    std::vector<std::uint32_t> words;
    for (const auto& [token, count] : doc.counts) {
        if (auto idx = model.vocabulary.find(token)) words.insert(words.end(), static_cast<std::size_t>(count), *idx);
    }
    if (words.empty()) {
        throw Error(ErrorCode::EmptyDocument, "document " + doc.workbook_id + " has no in-vocabulary tokens");
    }

    const int sweeps = std::max(1, options.iterations);
    const int averaged = std::max(1, static_cast<int>(std::ceil(sweeps * options.averaged_fraction)));
    const int first_averaged = sweeps - averaged + 1;

    Rng rng(seed);
    std::vector<int> nd(K, 0);
    std::vector<std::uint32_t> z(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        z[i] = static_cast<std::uint32_t>(rng.below(K));
        ++nd[z[i]];
    }

    const double norm = static_cast<double>(words.size()) + K * model.alpha;
    std::vector<double> cumulative(K);
    std::vector<double> accum(K, 0.0);
    for (int sweep = 1; sweep <= sweeps; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto w = words[i];
            --nd[z[i]];
            double acc = 0.0;
            for (std::size_t t = 0; t < K; ++t) {
                acc += (nd[t] + model.alpha) * model.topic_word[t * V + w];
                cumulative[t] = acc;
            }
            z[i] = static_cast<std::uint32_t>(sample_cumulative(cumulative, rng.uniform()));
            ++nd[z[i]];
        }
        if (sweep >= first_averaged) {
            for (std::size_t t = 0; t < K; ++t) accum[t] += (nd[t] + model.alpha) / norm;
        }
    }

    TopicDistribution theta;
    theta.probabilities = std::move(accum);
    normalize_in_place(theta.probabilities);
    return theta;
}

}  // namespace vizrec::models
