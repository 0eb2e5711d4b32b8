#include <catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/scoring.hpp"

using namespace vizrec;
using namespace vizrec::scoring;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<text::Document> topic_docs() {
    testing::SynthOptions o;
    o.n_topics = 3;
    o.per_topic = 6;
    o.seed = 41;
    std::vector<text::Document> docs;
    const auto stops = text::StopWordList::defaults();
    for (const auto& wb : testing::make_topic_repo(o).workbooks) {
        auto raw = ingest::parse_workbook(wb.xml(), wb.id());
        docs.push_back(text::build_document(raw, text::FeatureProfile::all_text(), stops));
    }
    return docs;
}

}  // namespace

TEST_CASE("model tags") {
    CHECK(parse_model_tag("tfidf") == ModelTag{ModelKind::TfIdf, 0});
    CHECK(parse_model_tag("lsi-150") == ModelTag{ModelKind::Lsi, 150});
    CHECK(parse_model_tag("lda-15") == ModelTag{ModelKind::Lda, 15});
    CHECK(parse_model_tag("embedding") == ModelTag{ModelKind::Embedding, 0});
    for (const char* bad : {"", "lda", "lda-", "lda-0", "lda-x", "lsi-12a", "bm25", "LDA-15"}) {
        INFO(bad);
        CHECK_FALSE(parse_model_tag(bad));
    }
    CHECK(parse_model_tag("lda-75")->str() == "lda-75");
}

TEST_CASE("every model kind scores documents") {
    const auto docs = topic_docs();
    models::WordVectorTable table;
    table.dim = 2;
    Rng rng(3);
    for (const auto& d : docs) {
        for (const auto& [tok, n] : d.counts) table.vectors[tok] = {rng.normal(), rng.normal()};
    }
    ScorerOptions so{.seed = 2, .lda_iterations = 100, .lda_infer_iterations = 50, .word_vectors = &table};
    for (const char* tag : {"tfidf", "lsi-5", "lda-3", "embedding"}) {
        INFO(tag);
        const auto s = make_scorer(*parse_model_tag(tag), docs, so);
        CHECK(s->tag() == tag);
        const auto self = s->score(docs[0].workbook_id, docs[0].workbook_id);
        CHECK_THAT(self, WithinAbs(1.0, 1e-9));
        const auto x = s->score(docs[0].workbook_id, docs[7].workbook_id);
        CHECK(x <= 1.0 + 1e-12);
        CHECK(x == s->score(docs[7].workbook_id, docs[0].workbook_id));
        try {
            s->score(docs[0].workbook_id, "nope");
            FAIL("expected UnknownWorkbook");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownWorkbook);
        }
    }
    so.word_vectors = nullptr;
    CHECK_THROWS_AS(make_scorer(*parse_model_tag("embedding"), docs, so), Error);
}

TEST_CASE("same-topic documents outscore cross-topic ones under tfidf") {
    const auto docs = topic_docs();
    const auto s = make_scorer(*parse_model_tag("tfidf"), docs, {});
    CHECK(s->score(docs[0].workbook_id, docs[1].workbook_id) > s->score(docs[0].workbook_id, docs[6].workbook_id));
}

TEST_CASE("documents without representation surface their error") {
    std::vector<text::Document> docs{testing::make_doc("a", {"x", "y"}), testing::make_doc("b", {"x", "z"}),
                                     testing::make_doc("c", {"x"})};
    const auto s = make_scorer(*parse_model_tag("tfidf"), docs, {});
    try {
        s->score("a", "c");
        FAIL("expected ZeroVector");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVector);
    }
}
