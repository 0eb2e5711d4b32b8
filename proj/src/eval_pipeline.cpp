#include "vizrec/eval_pipeline.hpp"

#include <spdlog/spdlog.h>

#include "vizrec/error.hpp"
#include "vizrec/ingest.hpp"
#include "vizrec/lda.hpp"

namespace vizrec::eval {

EvalCorpus prepare_corpus(const config::RunConfig& cfg) {
    auto repo = ingest::load_repository(cfg.repo, cfg.workers);
    for (const auto& issue : repo.report.issues) spdlog::warn("{}: {}", issue.path, issue.message);
    const auto stops = cfg.stopwords.empty() ? text::StopWordList::defaults() : text::StopWordList::load(cfg.stopwords);
    std::set<std::string> excluded;
    if (!cfg.exclusions.empty()) excluded = read_exclusion_list(cfg.exclusions);

    auto& wbs = repo.workbooks;
    std::sort(wbs.begin(), wbs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    EvalCorpus corpus;
    for (const auto& wb : wbs) {
        if (!wb.has_marks() || wb.language_tag != "en" || excluded.count(wb.id)) continue;
        if (cfg.eval_unit == "sheet") {
            for (const auto& sheet : wb.sheets) {
                if (sheet.kind != ingest::SheetKind::View || !sheet.has_marks) continue;
                const auto id = wb.id + ":" + sheet.sheet_name;
                if (excluded.count(id)) continue;
                auto doc = text::build_document(wb, text::FeatureProfile::sheet_plus_title(sheet.sheet_name), stops);
                doc.workbook_id = id;
                if (!doc.empty()) corpus.docs.push_back(std::move(doc));
            }
        } else {
            auto doc = text::build_document(wb, text::FeatureProfile::all_text(), stops);
            if (!doc.empty()) corpus.docs.push_back(std::move(doc));
        }
    }
    if (corpus.docs.empty()) throw Error(ErrorCode::InsufficientCorpus, "no usable documents in " + cfg.repo);

    models::LdaOptions lo;
    lo.k = cfg.strata_k;
    lo.alpha = cfg.lda_alpha;
    lo.iterations = cfg.lda_iterations;
    lo.seed = cfg.seed.value_or(0);
    const auto fit = models::fit_lda(corpus.docs, lo);
    for (const auto& theta : fit.training_theta) corpus.strata.push_back(theta.argmax());
    return corpus;
}

std::vector<Triplet> obtain_triplets(const config::RunConfig& cfg, const EvalCorpus& corpus) {
    if (!cfg.triplets_path.empty()) return read_triplets_csv(cfg.triplets_path);
    return sample_triplets(corpus.docs, corpus.strata, static_cast<std::size_t>(cfg.triplets), cfg.seed.value_or(0));
}

AgreementReport run_agreement(const config::RunConfig& cfg, const EvalCorpus& corpus,
                              std::span<const Triplet> triplets, const JudgementSet& judgements,
                              const GoldLabels& gold) {
    std::optional<models::WordVectorTable> vectors;
    if (!cfg.word_vectors.empty()) vectors = models::load_word_vectors(cfg.word_vectors);
    scoring::ScorerOptions so;
    so.seed = cfg.seed.value_or(0);
    so.lda_iterations = cfg.lda_iterations;
    so.lda_infer_iterations = cfg.lda_infer_iterations;
    so.lda_alpha = cfg.lda_alpha;
    so.workers = cfg.workers;
    so.word_vectors = vectors ? &*vectors : nullptr;

    std::vector<std::unique_ptr<scoring::Scorer>> owned;
    std::vector<const scoring::Scorer*> scorers;
    for (const auto& tag : cfg.models) {
        const auto parsed = scoring::parse_model_tag(tag);
        if (!parsed) throw Error(ErrorCode::InvalidConfig, "unknown model tag '" + tag + "'");
        spdlog::info("fitting {}", tag);
        owned.push_back(scoring::make_scorer(*parsed, corpus.docs, so));
        scorers.push_back(owned.back().get());
    }
    return agreement_report(triplets, judgements, gold, scorers, cfg.workers);
}

}  // namespace vizrec::eval
