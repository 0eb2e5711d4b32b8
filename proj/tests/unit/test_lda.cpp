#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "synthetic.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/lda.hpp"

using namespace vizrec;
using namespace vizrec::models;
using vizrec::testing::make_doc;

namespace {

struct Planted {
    std::vector<std::string> half_a, half_b;
    std::vector<text::Document> docs;
};

// 50 documents per half, each drawing 60 tokens from one disjoint vocabulary.
Planted planted_corpus() {
    Planted p;
    vizrec::testing::WordFactory words(21);
    p.half_a = words.take(25);
    p.half_b = words.take(25);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto& vocab = i < 50 ? p.half_a : p.half_b;
        std::vector<std::string> toks;
        for (int t = 0; t < 60; ++t) toks.push_back(vocab[rng.below(vocab.size())]);
        p.docs.push_back(make_doc("d" + std::to_string(i), toks));
    }
    return p;
}

const Planted& corpus() {
    static const Planted p = planted_corpus();
    return p;
}

const LdaFit& fitted() {
    static const LdaFit fit = fit_lda(corpus().docs, {.k = 2, .iterations = 300, .seed = 4});
    return fit;
}

}  // namespace

TEST_CASE("each topic's top words come from one half") {
    const auto& fit = fitted();
    const std::set<std::string> a(corpus().half_a.begin(), corpus().half_a.end());
    for (std::size_t topic = 0; topic < 2; ++topic) {
        const auto top = fit.model.top_words(topic, 10);
        REQUIRE(top.size() == 10);
        const auto in_a = std::count_if(top.begin(), top.end(),
                                        [&](auto w) { return a.contains(fit.model.vocabulary.tokens[w]); });
        CHECK((in_a == 0 || in_a == 10));
    }
}

TEST_CASE("distributions are normalized") {
    const auto& fit = fitted();
    const auto v = fit.model.vocab_size();
    for (int t = 0; t < 2; ++t) {
        const double s = std::accumulate(fit.model.topic_word.begin() + t * v, fit.model.topic_word.begin() + (t + 1) * v, 0.0);
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
    for (const auto& th : fit.training_theta) {
        CHECK(std::abs(std::accumulate(th.probabilities.begin(), th.probabilities.end(), 0.0) - 1.0) < 1e-9);
    }
    CHECK(fit.model.alpha == 25.0);
}

TEST_CASE("same seed gives bit-identical topics") {
    const auto again = fit_lda(corpus().docs, {.k = 2, .iterations = 300, .seed = 4});
    CHECK(again.model.topic_word == fitted().model.topic_word);
    CHECK(again.training_theta == fitted().training_theta);
}

TEST_CASE("fold-in of a planted document") {
    const auto& fit = fitted();
    const std::set<std::string> a(corpus().half_a.begin(), corpus().half_a.end());
    // Topic that carries half A.
    const auto w = *fit.model.vocabulary.find(corpus().half_a.front());
    const std::size_t topic_a = fit.model.phi(0, w) > fit.model.phi(1, w) ? 0 : 1;

    // alpha = 50/k = 25 per topic, so the posterior mean can only pass 0.8 once
    // the document is longer than 75 tokens.
    std::vector<std::string> toks;
    for (int i = 0; i < 120; ++i) toks.push_back(corpus().half_a[i % 25]);
    const auto doc = make_doc("new", toks);
    const LdaInferOptions opts{.iterations = 200};
    const auto theta = lda_infer(fit.model, doc, 3, opts);
    CHECK(theta.probabilities[topic_a] > 0.8);
    CHECK(theta.argmax() == topic_a);
    CHECK(lda_infer(fit.model, doc, 3, opts) == theta);
    CHECK_THROWS_AS(lda_infer(fit.model, make_doc("x", {"unseen"}), 3), Error);
}

TEST_CASE("perplexity trace and argument checks") {
    const auto fit = fit_lda(corpus().docs, {.k = 2, .iterations = 40, .seed = 1, .checkpoint_every = 10});
    CHECK(fit.perplexity_trace.size() == 5);  // initial state + every 10th sweep
    CHECK(fit.perplexity_trace.back() <= fit.perplexity_trace.front());
    CHECK_THROWS_AS(fit_lda(corpus().docs, {.k = 1}), Error);
    std::vector<text::Document> empty{text::Document{}};
    CHECK_THROWS_AS(fit_lda(empty, {.k = 2}), Error);
}
