#include <algorithm>
#include <set>
#include <variant>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vizrec/bundle_files.hpp"
#include "vizrec/embedding.hpp"
#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/index.hpp"
#include "vizrec/lda.hpp"
#include "vizrec/lsi.hpp"
#include "vizrec/minhash.hpp"
#include "vizrec/model_io.hpp"
#include "vizrec/parallel.hpp"
#include "vizrec/scoring.hpp"

namespace vizrec::service {

using nlohmann::json;
using similarity::Facet;

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string initials(const std::string& title, const std::string& id) {
    std::string out;
    bool at_word_start = true;
    for (char c : title) {
        const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (alnum && at_word_start && out.size() < 2) out += (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c;
        at_word_start = !alnum;
    }
    if (out.empty()) out = id.substr(0, 2);
    return out;
}

// One facet's document representations. Similarity is cosine for vectors and
// 1 - JSD for topic mixtures.
using Rep = std::variant<std::monostate, models::SparseVector, std::vector<double>, models::TopicDistribution>;

double rep_similarity(const Rep& a, const Rep& b) {
    if (const auto* x = std::get_if<models::SparseVector>(&a)) {
        return similarity::cosine_similarity(*x, std::get<models::SparseVector>(b));
    }
    if (const auto* x = std::get_if<std::vector<double>>(&a)) {
        return similarity::cosine_similarity(*x, std::get<std::vector<double>>(b));
    }
    return similarity::jsd_similarity(std::get<models::TopicDistribution>(a), std::get<models::TopicDistribution>(b));
}

struct Space {
    std::vector<Rep> reps;  // monostate: no representation, excluded from the facet
    std::optional<std::string> artifact;  // serialized model, if any
};

Space build_space(const scoring::ModelTag& tag, const std::vector<const text::Document*>& docs,
                  const config::RunConfig& cfg, const models::WordVectorTable* vectors,
                  std::vector<std::string>& warnings, const std::string& label) {
    Space space;
    space.reps.resize(docs.size());
    std::vector<text::Document> corpus;
    corpus.reserve(docs.size());
    for (const auto* d : docs) corpus.push_back(*d);
    const std::uint64_t seed = *cfg.seed;
    auto note = [&](std::size_t i, const Error& e) {
        warnings.push_back(fmt::format("{}: {} has no representation ({})", label, docs[i]->workbook_id, e.what()));
    };

    switch (tag.kind) {
    case scoring::ModelKind::TfIdf:
    case scoring::ModelKind::Lsi: {
        const auto tfidf = models::fit_tfidf(corpus);
        std::vector<models::SparseVector> rows;
        for (const auto& d : corpus) rows.push_back(models::tfidf_vector(tfidf, d));
        if (tag.kind == scoring::ModelKind::TfIdf) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].empty()) space.reps[i] = rows[i];
            }
            break;
        }
        models::LsiOptions lo;
        lo.k = tag.k;
        lo.seed = seed;
        const auto fit = models::fit_lsi(rows, tfidf.vocabulary.size(), lo);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto row = fit.document_embedding.row(static_cast<Eigen::Index>(i));
            std::vector<double> v(row.begin(), row.end());
            if (std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; })) space.reps[i] = std::move(v);
        }
        space.artifact = io::encode_lsi(fit.model);
        break;
    }
    case scoring::ModelKind::Lda: {
        models::LdaOptions lo;
        lo.k = tag.k;
        lo.alpha = cfg.lda_alpha;
        lo.iterations = cfg.lda_iterations;
        lo.seed = seed;
        const auto fit = models::fit_lda(corpus, lo);
        models::LdaInferOptions io_opts;
        io_opts.iterations = cfg.lda_infer_iterations;
        std::vector<std::optional<Error>> errors(corpus.size());
        parallel_for(corpus.size(), cfg.workers, [&](std::size_t i) {
            try {
                space.reps[i] = models::lda_infer(fit.model, corpus[i], seed, io_opts);
            } catch (const Error& e) {
                errors[i] = e;
            }
        });
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (errors[i]) note(i, *errors[i]);
        }
        space.artifact = io::encode_lda(fit.model);
        break;
    }
    case scoring::ModelKind::Embedding: {
        if (!vectors) throw Error(ErrorCode::InvalidConfig, "model 'embedding' needs word_vectors");
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            try {
                space.reps[i] = models::embed_document(*vectors, corpus[i]);
            } catch (const Error& e) {
                note(i, e);
            }
        }
        break;
    }
    }
    return space;
}

// Symmetric all-pairs scores over the participants of one space, computed
// once per unordered pair so score(i, j) == score(j, i) bit for bit.
std::vector<double> pair_scores(const Space& space, unsigned workers) {
    const std::size_t n = space.reps.size();
    std::vector<double> s(n * n, -1.0);
    parallel_for(n, workers, [&](std::size_t i) {
        if (std::holds_alternative<std::monostate>(space.reps[i])) return;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::holds_alternative<std::monostate>(space.reps[j])) continue;
            s[i * n + j] = rep_similarity(space.reps[i], space.reps[j]);
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) s[i * n + j] = s[j * n + i];
    }
    return s;
}

std::set<std::pair<std::size_t, std::size_t>> minhash_filter(const std::vector<const text::Document*>& docs,
                                                             const Space& space, std::uint64_t seed,
                                                             double threshold) {
    std::vector<similarity::MinHashSignature> sigs;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (std::holds_alternative<std::monostate>(space.reps[i]) || docs[i]->empty()) continue;
        sigs.push_back(similarity::minhash_signature(*docs[i], seed));
        which.push_back(i);
    }
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [a, b] : similarity::minhash_candidates(sigs, threshold)) out.emplace(which[a], which[b]);
    return out;
}

void write_bundle_file(const std::filesystem::path& dir, const std::string& name, const std::string& bytes,
                       json& checksums) {
    io::write_file_bytes(dir / name, bytes);
    checksums[name] = hex64(fnv1a64(bytes));
}

}  // namespace

BuildReport build_index(const config::RunConfig& cfg, const std::filesystem::path& out_dir) {
    config::validate(cfg, true);
    const std::uint64_t seed = *cfg.seed;
    BuildReport report;

    if (std::filesystem::exists(out_dir)) {
        const bool empty = std::filesystem::is_directory(out_dir) && std::filesystem::is_empty(out_dir);
        if (!empty && !std::filesystem::exists(out_dir / files::kManifest)) {
            throw Error(ErrorCode::InvalidConfig, "refusing to replace " + out_dir.string() + ": not a bundle directory");
        }
    }

    auto repo = ingest::load_repository(cfg.repo, cfg.workers);
    report.files_seen = repo.report.files_seen;
    report.issues = repo.report.issues;
    auto& wbs = repo.workbooks;
    std::sort(wbs.begin(), wbs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    report.parsed = wbs.size();

    const auto stops = cfg.stopwords.empty() ? text::StopWordList::defaults() : text::StopWordList::load(cfg.stopwords);
    std::optional<models::WordVectorTable> word_vectors;
    if (!cfg.word_vectors.empty()) word_vectors = models::load_word_vectors(cfg.word_vectors);

    const std::size_t n = wbs.size();
    std::vector<text::Document> all_docs(n), col_docs(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        all_docs[i] = text::build_document(wbs[i], text::FeatureProfile::all_text(), stops);
        col_docs[i] = text::build_document(wbs[i], text::FeatureProfile::columns_only(), stops);
    });

    std::vector<WorkbookMeta> metas(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& wb = wbs[i];
        auto& m = metas[i];
        m.id = wb.id;
        m.title = wb.title;
        m.author = wb.author;
        m.modified_date = wb.modified_date;
        m.language = wb.language_tag;
        m.source_path = wb.source_path;
        for (const auto& s : wb.sheets) (s.kind == ingest::SheetKind::View ? m.n_views : m.n_dashboards) += 1;
        for (const auto& ds : wb.datasources) m.n_columns += static_cast<int>(ds.column_captions.size());
        m.has_marks = wb.has_marks();
        m.total_tokens = all_docs[i].total_tokens;
        m.unique_tokens = all_docs[i].unique_tokens;
        if (!m.has_marks) {
            m.exclusion = "no_marks";
        } else if (m.language != "en") {
            m.exclusion = "non_english";
        } else if (!text::eligible_for_recommendation(all_docs[i])) {
            m.exclusion = "too_few_words";
        }
        m.eligible = m.exclusion.empty();
        m.glyph = initials(wb.title, wb.id);
        m.glyph_color = kPalette[fnv1a64(wb.id) % std::size(kPalette)];
        if (m.eligible) {
            ++report.eligible;
        } else {
            ++report.excluded[m.exclusion];
        }
    }
    for (const char* rule : {"no_marks", "non_english", "too_few_words"}) report.excluded.try_emplace(rule, 0);

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < n; ++i) {
        if (metas[i].eligible) eligible.push_back(i);
    }
    if (eligible.empty()) {
        report.success = false;
        report.failure = "EmptyCorpus: no eligible workbooks";
        return report;
    }

    std::vector<text::Document> training;
    for (auto i : eligible) training.push_back(all_docs[i]);
    const auto tfidf = models::fit_tfidf(training);

    std::map<std::pair<std::size_t, Facet>, std::vector<similarity::Neighbor>> lists;
    std::vector<similarity::ScoredPair> group_edges;
    std::string facet_artifact, columns_artifact;

    try {
        // Related + versions share the all-text space.
        const auto facet_tag = *scoring::parse_model_tag(cfg.facet_model);
        std::vector<const text::Document*> docs;
        for (auto i : eligible) docs.push_back(&all_docs[i]);
        const auto space = build_space(facet_tag, docs, cfg, word_vectors ? &*word_vectors : nullptr, report.warnings,
                                       "all_text");
        if (space.artifact) facet_artifact = *space.artifact;
        const auto scores = pair_scores(space, cfg.workers);
        const std::size_t m = docs.size();
        std::optional<std::set<std::pair<std::size_t, std::size_t>>> mh;
        if (cfg.minhash) mh = minhash_filter(docs, space, seed, cfg.minhash_threshold);

        for (Facet f : {Facet::Related, Facet::Versions}) {
            const auto fc = cfg.facet(f);
            for (std::size_t i = 0; i < m; ++i) {
                if (std::holds_alternative<std::monostate>(space.reps[i])) continue;
                std::vector<similarity::Candidate> cands;
                for (std::size_t j = 0; j < m; ++j) {
                    if (j == i || scores[i * m + j] < 0.0) continue;
                    if (f == Facet::Versions && mh && !mh->count({std::min(i, j), std::max(i, j)})) continue;
                    cands.push_back({docs[j]->workbook_id, scores[i * m + j], true});
                }
                auto list = similarity::top_k_neighbors(docs[i]->workbook_id, true, cands, fc,
                                                        static_cast<std::size_t>(cfg.neighbors_per_facet));
                if (!list.neighbors.empty()) lists[{eligible[i], f}] = std::move(list.neighbors);
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                if (mh && !mh->count({i, j})) continue;
                if (scores[i * m + j] >= cfg.versions_low) {
                    group_edges.push_back({docs[i]->workbook_id, docs[j]->workbook_id, scores[i * m + j]});
                }
            }
        }

        // Similar data: separate model over column names of workbooks whose
        // column document is itself eligible.
        std::vector<std::size_t> col_members;
        std::vector<const text::Document*> cdocs;
        for (auto i : eligible) {
            if (text::eligible_for_recommendation(col_docs[i])) {
                col_members.push_back(i);
                cdocs.push_back(&col_docs[i]);
            }
        }
        if (cdocs.size() < 2) {
            report.warnings.push_back("similar-data facet skipped: fewer than two workbooks with 10 column tokens");
        } else {
            const auto col_tag = *scoring::parse_model_tag(cfg.similar_data_model);
            const auto cspace = build_space(col_tag, cdocs, cfg, word_vectors ? &*word_vectors : nullptr,
                                            report.warnings, "columns");
            if (cspace.artifact) columns_artifact = *cspace.artifact;
            const auto cscores = pair_scores(cspace, cfg.workers);
            const std::size_t cm = cdocs.size();
            std::optional<std::set<std::pair<std::size_t, std::size_t>>> cmh;
            if (cfg.minhash) cmh = minhash_filter(cdocs, cspace, seed, cfg.minhash_threshold);
            const auto fc = cfg.facet(Facet::SimilarData);
            for (std::size_t i = 0; i < cm; ++i) {
                if (std::holds_alternative<std::monostate>(cspace.reps[i])) continue;
                std::vector<similarity::Candidate> cands;
                for (std::size_t j = 0; j < cm; ++j) {
                    if (j == i || cscores[i * cm + j] < 0.0) continue;
                    if (cmh && !cmh->count({std::min(i, j), std::max(i, j)})) continue;
                    cands.push_back({cdocs[j]->workbook_id, cscores[i * cm + j], true});
                }
                auto list = similarity::top_k_neighbors(cdocs[i]->workbook_id, true, cands, fc,
                                                        static_cast<std::size_t>(cfg.neighbors_per_facet));
                if (!list.neighbors.empty()) lists[{col_members[i], Facet::SimilarData}] = std::move(list.neighbors);
            }
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::IoError) throw;
        report.success = false;
        report.failure = e.what();
        return report;
    }

    std::vector<similarity::GroupMember> members;
    for (auto i : eligible) members.push_back({metas[i].id, metas[i].modified_date});
    const auto groups = similarity::group_near_duplicates(group_edges, members, cfg.versions_low);
    report.groups = groups.size();

    // Tags: summed raw TF-IDF weight over the training corpus.
    std::vector<double> weight(tfidf.vocabulary.size(), 0.0);
    for (const auto& d : training) {
        const auto w = models::tfidf_weights(tfidf, d);
        for (std::size_t k = 0; k < w.size(); ++k) weight[w.indices[k]] += w.values[k];
    }
    std::vector<std::uint32_t> order(weight.size());
    for (std::uint32_t t = 0; t < order.size(); ++t) order[t] = t;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return weight[a] != weight[b] ? weight[a] > weight[b] : tfidf.vocabulary.tokens[a] < tfidf.vocabulary.tokens[b];
    });
    std::map<std::string, std::vector<std::string>> inverted;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [token, count] : all_docs[i].counts) inverted[token].push_back(metas[i].id);
    }
    json tags = json::array();
    for (std::size_t r = 0; r < order.size() && r < kTagCount; ++r) {
        if (weight[order[r]] <= 0.0) break;
        const auto& token = tfidf.vocabulary.tokens[order[r]];
        tags.push_back({{"tag", token}, {"weight", weight[order[r]]}, {"workbook_ids", inverted[token]}});
    }

    // Write.
    std::filesystem::remove_all(out_dir);
    std::filesystem::create_directories(out_dir);
    json checksums = json::object();

    std::string workbooks_jsonl, documents_jsonl;
    for (std::size_t i = 0; i < n; ++i) {
        workbooks_jsonl += metas[i].to_json().dump() + "\n";
        documents_jsonl += json{{"workbook_id", metas[i].id}, {"profile", "all_text"}, {"counts", all_docs[i].counts}}
                               .dump() + "\n";
        documents_jsonl +=
            json{{"workbook_id", metas[i].id}, {"profile", "columns_only"}, {"counts", col_docs[i].counts}}.dump() +
            "\n";
    }
    write_bundle_file(out_dir, files::kWorkbooks, workbooks_jsonl, checksums);
    write_bundle_file(out_dir, files::kDocuments, documents_jsonl, checksums);

    std::string stop_text;
    for (const auto& e : stops.entries()) stop_text += e + "\n";
    write_bundle_file(out_dir, files::kStopwords, stop_text, checksums);

    write_bundle_file(out_dir, files::kTfIdf, io::encode_tfidf(tfidf), checksums);
    if (!facet_artifact.empty()) write_bundle_file(out_dir, files::kFacetModel, facet_artifact, checksums);
    if (!columns_artifact.empty()) write_bundle_file(out_dir, files::kColumnsModel, columns_artifact, checksums);

    io::BinaryWriter nw(io::ArtifactKind::NeighborLists);
    nw.u64(lists.size());
    for (const auto& [key, list] : lists) {
        nw.str(metas[key.first].id);
        nw.u32(static_cast<std::uint32_t>(key.second));
        nw.u64(list.size());
        for (const auto& nb : list) {
            nw.str(nb.id);
            nw.f64(nb.score);
        }
        report.neighbor_counts[std::string(similarity::to_string(key.second))] += list.size();
    }
    for (auto f : similarity::kAllFacets) report.neighbor_counts.try_emplace(std::string(similarity::to_string(f)), 0);
    write_bundle_file(out_dir, files::kNeighbors, nw.bytes(), checksums);

    std::string groups_jsonl;
    for (const auto& g : groups) {
        groups_jsonl += json{{"group_id", g.group_id}, {"member_ids", g.member_ids},
                             {"representative_id", g.representative_id}}
                            .dump() + "\n";
    }
    write_bundle_file(out_dir, files::kGroups, groups_jsonl, checksums);
    write_bundle_file(out_dir, files::kTags, json{{"tags", tags}}.dump(1) + "\n", checksums);

    io::BinaryWriter iw(io::ArtifactKind::InvertedIndex);
    iw.u64(inverted.size());
    for (const auto& [token, ids] : inverted) {
        iw.str(token);
        iw.strs(ids);
    }
    write_bundle_file(out_dir, files::kInverted, iw.bytes(), checksums);
    write_bundle_file(out_dir, files::kBuildReport, report.to_json().dump(1) + "\n", checksums);

    auto echo = cfg;
    echo.bundle.clear();
    echo.workers = 1;  // parallelism never changes the output, so it is not recorded
    json facets = json::object();
    for (auto f : similarity::kAllFacets) {
        const auto fc = cfg.facet(f);
        facets[std::string(similarity::to_string(f))] = {{"low", fc.low},
                                                         {"high", fc.high},
                                                         {"high_inclusive", fc.high_inclusive},
                                                         {"profile", text::to_string(fc.profile)},
                                                         {"model", f == Facet::SimilarData ? cfg.similar_data_model
                                                                                           : cfg.facet_model}};
    }
    json manifest{{"format_version", kBundleFormatVersion},
                  {"config", config::emit(echo)},
                  {"facets", facets},
                  {"counts", {{"workbooks", n}, {"eligible", report.eligible}, {"groups", groups.size()}}},
                  {"files", checksums}};
    io::write_file_bytes(out_dir / files::kManifest, manifest.dump(1) + "\n");
    spdlog::info("bundle written to {}: {} workbooks, {} eligible, {} groups", out_dir.string(), n, report.eligible,
                 groups.size());
    return report;
}

}  // namespace vizrec::service
