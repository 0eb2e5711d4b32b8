#include "vizrec/scoring.hpp"

#include <charconv>
#include <variant>

#include "vizrec/error.hpp"
#include "vizrec/lda.hpp"
#include "vizrec/lsi.hpp"
#include "vizrec/parallel.hpp"
#include "vizrec/similarity.hpp"
#include "vizrec/tfidf.hpp"

namespace vizrec::scoring {

std::string ModelTag::str() const {
    switch (kind) {
    case ModelKind::TfIdf: return "tfidf";
    case ModelKind::Lsi: return "lsi-" + std::to_string(k);
    case ModelKind::Lda: return "lda-" + std::to_string(k);
    case ModelKind::Embedding: return "embedding";
    }
    return "unknown";
}

std::optional<ModelTag> parse_model_tag(std::string_view tag) {
    if (tag == "tfidf") return ModelTag{ModelKind::TfIdf, 0};
    if (tag == "embedding") return ModelTag{ModelKind::Embedding, 0};
    for (auto [prefix, kind] : {std::pair{std::string_view("lsi-"), ModelKind::Lsi},
                                std::pair{std::string_view("lda-"), ModelKind::Lda}}) {
        if (!tag.starts_with(prefix)) continue;
        const auto digits = tag.substr(prefix.size());
        int k = 0;
        auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty() || k < 1) return std::nullopt;
        return ModelTag{kind, k};
    }
    return std::nullopt;
}

namespace {

// One representation per document, or the error that prevented building it.
template <typename Rep>
class TableScorer final : public Scorer {
public:
    using Similarity = std::function<double(const Rep&, const Rep&)>;

    TableScorer(std::string tag, std::span<const text::Document> corpus, std::vector<std::variant<Rep, Error>> reps,
                Similarity sim)
        : tag_(std::move(tag)), reps_(std::move(reps)), sim_(std::move(sim)) {
        for (std::size_t i = 0; i < corpus.size(); ++i) index_.emplace(corpus[i].workbook_id, i);
    }

    std::string tag() const override { return tag_; }

    double score(const std::string& a, const std::string& b) const override {
        return sim_(rep(a), rep(b));
    }

private:
    const Rep& rep(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw Error(ErrorCode::UnknownWorkbook, id);
        const auto& slot = reps_[it->second];
        if (const auto* err = std::get_if<Error>(&slot)) throw *err;
        return std::get<Rep>(slot);
    }

    std::string tag_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::variant<Rep, Error>> reps_;
    Similarity sim_;
};

template <typename Rep, typename Fn>
std::vector<std::variant<Rep, Error>> build_reps(std::span<const text::Document> corpus, unsigned workers, Fn fn) {
    std::vector<std::variant<Rep, Error>> reps(corpus.size(), Error(ErrorCode::EmptyDocument, "unset"));
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        try {
            reps[i] = fn(corpus[i]);
        } catch (const Error& e) {
            reps[i] = e;
        }
    });
    return reps;
}

double sparse_cosine(const models::SparseVector& a, const models::SparseVector& b) {
    return similarity::cosine_similarity(a, b);
}

double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    return similarity::cosine_similarity(a, b);
}

}  // namespace

std::unique_ptr<Scorer> make_scorer(const ModelTag& tag, std::span<const text::Document> corpus,
                                    const ScorerOptions& options) {
    switch (tag.kind) {
    case ModelKind::TfIdf: {
        const auto model = models::fit_tfidf(corpus);
        auto reps = build_reps<models::SparseVector>(corpus, options.workers, [&](const text::Document& d) {
            return models::tfidf_vector(model, d);
        });
        return std::make_unique<TableScorer<models::SparseVector>>(tag.str(), corpus, std::move(reps), sparse_cosine);
    }
    case ModelKind::Lsi: {
        const auto tfidf = models::fit_tfidf(corpus);
        std::vector<models::SparseVector> rows;
        rows.reserve(corpus.size());
        for (const auto& d : corpus) rows.push_back(models::tfidf_vector(tfidf, d));
        models::LsiOptions lo;
        lo.k = tag.k;
        lo.seed = options.seed;
        const auto fit = models::fit_lsi(rows, tfidf.vocabulary.size(), lo);
        std::vector<std::variant<std::vector<double>, Error>> reps;
        reps.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto row = fit.document_embedding.row(static_cast<Eigen::Index>(i));
            reps.emplace_back(std::vector<double>(row.begin(), row.end()));
        }
        return std::make_unique<TableScorer<std::vector<double>>>(tag.str(), corpus, std::move(reps), dense_cosine);
    }
    case ModelKind::Lda: {
        models::LdaOptions lo;
        lo.k = tag.k;
        lo.alpha = options.lda_alpha;
        lo.iterations = options.lda_iterations;
        lo.seed = options.seed;
        const auto fit = models::fit_lda(corpus, lo);
        models::LdaInferOptions io;
        io.iterations = options.lda_infer_iterations;
        auto reps = build_reps<models::TopicDistribution>(corpus, options.workers, [&](const text::Document& d) {
            return models::lda_infer(fit.model, d, options.seed, io);
        });
        return std::make_unique<TableScorer<models::TopicDistribution>>(
            tag.str(), corpus, std::move(reps),
            [](const models::TopicDistribution& p, const models::TopicDistribution& q) {
                return similarity::jsd_similarity(p, q);
            });
    }
    case ModelKind::Embedding: {
        if (!options.word_vectors) throw Error(ErrorCode::InvalidConfig, "embedding scorer needs a word-vector table");
        const auto& table = *options.word_vectors;
        auto reps = build_reps<std::vector<double>>(corpus, options.workers, [&](const text::Document& d) {
            return models::embed_document(table, d);
        });
        return std::make_unique<TableScorer<std::vector<double>>>(tag.str(), corpus, std::move(reps), dense_cosine);
    }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown model kind");
}

}  // namespace vizrec::scoring
