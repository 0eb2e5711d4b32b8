#pragma once

#include <vector>

#include "vizrec/config.hpp"
#include "vizrec/eval.hpp"

namespace vizrec::eval {

struct EvalCorpus {
    std::vector<text::Document> docs;
    std::vector<std::size_t> strata;  // argmax topic per document
};

/// Loads the repository and builds one document per workbook ("all_text") or
/// per view sheet plus workbook title ("sheet", id "<workbook>:<sheet>").
/// Workbooks without marks, non-English ones and ids on the exclusion list
/// are dropped. Strata come from an LDA with `strata_k` topics.
EvalCorpus prepare_corpus(const config::RunConfig& cfg);

/// Reads `triplets_path` when set, otherwise samples `triplets` triplets.
std::vector<Triplet> obtain_triplets(const config::RunConfig& cfg, const EvalCorpus& corpus);

/// Fits every configured model on the corpus and builds the report.
AgreementReport run_agreement(const config::RunConfig& cfg, const EvalCorpus& corpus,
                              std::span<const Triplet> triplets, const JudgementSet& judgements,
                              const GoldLabels& gold);

}  // namespace vizrec::eval
