#include <catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "vizrec/tfidf.hpp"

using namespace vizrec;
using namespace vizrec::models;
using Catch::Matchers::WithinAbs;
using vizrec::testing::load_fixture_json;

namespace {

std::vector<text::Document> docs_from_json(const nlohmann::json& arr) {
    std::vector<text::Document> docs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        docs.push_back(text::Document::from_counts("d" + std::to_string(i), arr[i].get<std::map<std::string, int>>()));
    }
    return docs;
}

}  // namespace

TEST_CASE("vocabulary matches the brute-force set count") {
    const auto c = load_fixture_json("models_cases.json")["vocabulary"];
    const auto docs = docs_from_json(c["docs"]);
    for (int min_df : {1, 2}) {
        const auto want = c[min_df == 1 ? "min_df_1" : "min_df_2"].get<std::map<std::string, int>>();
        const auto v = build_vocabulary(docs, min_df);
        REQUIRE(v.size() == want.size());
        std::size_t i = 0;
        for (const auto& [tok, df] : want) {
            CHECK(v.tokens[i] == tok);
            CHECK(v.document_frequency[i] == df);
            CHECK(v.find(tok) == i);
            ++i;
        }
        CHECK(v.n_documents == 5);
        CHECK_FALSE(v.find("absent"));
    }
    CHECK(build_vocabulary(docs, 1).document_frequency[*build_vocabulary(docs, 1).find("sales")] == 4);
}

TEST_CASE("empty corpus is rejected") {
    std::vector<text::Document> none;
    CHECK_THROWS_AS(build_vocabulary(none), Error);
    CHECK_THROWS_AS(fit_tfidf(none), Error);
}

TEST_CASE("tfidf three-document case") {
    const auto c = load_fixture_json("models_cases.json")["tfidf_three"];
    const auto model = fit_tfidf(docs_from_json(c["docs"]));
    const auto q = text::Document::from_counts("q", c["query"].get<std::map<std::string, int>>());
    const auto raw = tfidf_weights(model, q);
    REQUIRE(raw.size() == 1);
    CHECK_THAT(raw.values[0], WithinAbs(c["value_a_raw"].get<double>(), 1e-12));
    const auto v = tfidf_vector(model, q);
    REQUIRE(v.size() == 1);
    CHECK(model.vocabulary.tokens[v.indices[0]] == "a");
    CHECK_THAT(v.values[0], WithinAbs(1.0, 1e-12));
}

TEST_CASE("tfidf edge cases") {
    std::vector<text::Document> docs{text::Document::from_counts("1", {{"x", 1}, {"y", 2}}),
                                      text::Document::from_counts("2", {{"x", 3}, {"z", 1}})};
    const auto model = fit_tfidf(docs);
    CHECK(model.idf[*model.vocabulary.find("x")] == 0.0);
    CHECK(tfidf_vector(model, text::Document::from_counts("q", {{"x", 5}})).empty());
    const auto single = tfidf_vector(model, text::Document::from_counts("q", {{"y", 7}, {"unknown", 2}}));
    REQUIRE(single.size() == 1);
    CHECK(single.values[0] == 1.0);
    CHECK_THAT(tfidf_vector(model, docs[0]).norm(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("sparse vector helpers") {
    SparseVector a{{0, 3}, {1.0, 2.0}};
    SparseVector b{{1, 3}, {4.0, 0.5}};
    CHECK(a.dot(b) == 1.0);
    CHECK_THAT(a.norm(), WithinAbs(std::sqrt(5.0), 1e-15));
    CHECK(a.to_dense(4) == std::vector<double>{1.0, 0.0, 0.0, 2.0});
}
