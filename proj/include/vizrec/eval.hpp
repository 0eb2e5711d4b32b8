#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vizrec/scoring.hpp"
#include "vizrec/text.hpp"

namespace vizrec::eval {

enum class Choice { A, B };

char to_char(Choice c) noexcept;
std::optional<Choice> choice_from_string(std::string_view s) noexcept;

struct Triplet {
    std::string id;
    std::string reference;
    std::string alt_a;
    std::string alt_b;
    double score_a = 0.0;  // baseline TF-IDF cosine ref-A
    double score_b = 0.0;

    bool operator==(const Triplet&) const = default;
};

struct SamplerOptions {
    double low = 0.15;
    double high = 0.90;
    double min_delta = 0.45;
    int min_words = 10;
    int max_words = 200;
    int max_uses = 2;
};

struct SamplerDoc {
    std::string id;
    int word_count = 0;
    std::size_t stratum = 0;
};

/// Core sampler over precomputed baseline scores. `score(i, j)` must be
/// symmetric. Strata are visited round-robin in ascending order; within a
/// stratum references are drawn in a seeded shuffled order. Throws
/// InsufficientCorpus when fewer than n triplets can be formed.
std::vector<Triplet> sample_triplets(std::span<const SamplerDoc> docs,
                                     const std::function<double(std::size_t, std::size_t)>& score, std::size_t n,
                                     std::uint64_t seed, const SamplerOptions& options = {});

/// Convenience wrapper: TF-IDF cosine baseline fitted on `docs`, word counts
/// from total tokens, one stratum id per document.
std::vector<Triplet> sample_triplets(std::span<const text::Document> docs, std::span<const std::size_t> strata,
                                     std::size_t n, std::uint64_t seed, const SamplerOptions& options = {});

/// Human-readable description of the first constraint `t` violates, or empty.
std::string check_triplet(const Triplet& t, const std::map<std::string, int>& word_counts,
                          const SamplerOptions& options = {});

struct Prediction {
    Choice choice = Choice::A;
    bool tie = false;
    double score_a = 0.0;
    double score_b = 0.0;
};

/// Higher score wins; ties go to A with the tie flag set. Scorer errors are
/// rethrown as ScoringFailure naming the triplet.
Prediction model_2afc(const scoring::Scorer& scorer, const Triplet& t);

struct JudgementSet {
    // triplet id -> rater id -> choice
    std::map<std::string, std::map<std::string, Choice>> votes;

    std::set<std::string> raters() const;
    void add(const std::string& triplet_id, const std::string& rater_id, Choice c) { votes[triplet_id][rater_id] = c; }
};

using GoldLabels = std::map<std::string, Choice>;

struct KappaResult {
    double kappa = 0.0;  // NaN when undefined
    bool defined = true;
    std::size_t n_items = 0;
    std::size_t n_raters = 0;
    double observed_agreement = 0.0;
    double expected_agreement = 0.0;
};

/// Fleiss' kappa over an item x {A, B} vote-count matrix with the same number
/// of raters per item. Throws DegenerateInput for fewer than 2 raters, no
/// items or unequal rater counts. When every vote falls in one category the
/// expected agreement is 1 and the result is returned with defined = false.
KappaResult fleiss_kappa(std::span<const std::array<int, 2>> counts);
KappaResult fleiss_kappa(const JudgementSet& judgements);

/// Cohen's kappa with per-rater marginals. Throws DimensionMismatch on unequal
/// lengths and DegenerateInput on empty input; undefined as above.
KappaResult cohen_kappa(std::span<const Choice> r1, std::span<const Choice> r2);

struct ConsensusClass {
    std::string triplet_id;
    bool high = false;
    Choice majority = Choice::A;  // A on an exact split
    double vote_fraction = 0.0;   // share of votes for the majority choice
};

inline constexpr double kHighConsensus = 0.80;

/// High iff vote_fraction >= 0.80 and the majority agrees with the gold
/// label when one exists.
std::vector<ConsensusClass> consensus(const JudgementSet& judgements, const GoldLabels& gold = {});

struct ModelAgreement {
    std::string tag;
    std::vector<Prediction> predictions;  // aligned with AgreementReport::triplet_ids
    KappaResult overall;
    std::optional<KappaResult> high;  // absent when the split is empty
    std::optional<KappaResult> low;
    std::size_t ties = 0;
};

struct AgreementReport {
    static constexpr int kFormatVersion = 1;

    std::vector<std::string> triplet_ids;
    std::vector<ConsensusClass> consensus;
    KappaResult inter_rater;
    std::vector<ModelAgreement> models;
    std::vector<std::vector<KappaResult>> model_matrix;  // models x models

    nlohmann::json to_json() const;
    std::string console_table() const;
};

/// Scores every judged triplet with every scorer (parallel over pairs) and
/// compares predictions against the majority vote. Triplets without
/// judgements are skipped.
AgreementReport agreement_report(std::span<const Triplet> triplets, const JudgementSet& judgements,
                                 const GoldLabels& gold, std::span<const scoring::Scorer* const> scorers,
                                 unsigned workers = 1);

struct SyntheticRaterOptions {
    int n_raters = 10;
    double min_accuracy = 0.65;
    double max_accuracy = 0.95;
    double hard_fraction = 0.3;  // items where every rater is near chance
    double hard_accuracy = 0.55;
};

/// Noisy raters around planted ground truth, one truth label per triplet.
JudgementSet synthetic_judgements(std::span<const Triplet> triplets, std::span<const Choice> truth,
                                  std::uint64_t seed, const SyntheticRaterOptions& options = {});

// CSV formats (header line required):
//   triplets:   triplet_id,reference,alt_a,alt_b,score_a,score_b
//   judgements: triplet_id,rater_id,choice
//   gold:       triplet_id,choice
std::vector<Triplet> read_triplets_csv(const std::filesystem::path& path);
void write_triplets_csv(const std::filesystem::path& path, std::span<const Triplet> triplets);
std::string triplets_csv(std::span<const Triplet> triplets);
JudgementSet read_judgements_csv(const std::filesystem::path& path);
void write_judgements_csv(const std::filesystem::path& path, const JudgementSet& judgements);
GoldLabels read_gold_csv(const std::filesystem::path& path);
void write_gold_csv(const std::filesystem::path& path, const GoldLabels& gold);

/// One workbook id per line; blank lines and '#' comments ignored.
std::set<std::string> read_exclusion_list(const std::filesystem::path& path);

}  // namespace vizrec::eval
