// Acceptance checks, one per headline criterion. Run without arguments for all
// of them, or pass criterion numbers (1-9) to run a subset. Prints one
// PASS/FAIL line per criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "synthetic.hpp"
#include "vizrec/api.hpp"
#include "vizrec/config.hpp"
#include "vizrec/eval.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/index.hpp"
#include "vizrec/lda.hpp"
#include "vizrec/lsi.hpp"
#include "vizrec/minhash.hpp"
#include "vizrec/similarity.hpp"
#include "vizrec/tfidf.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vizrec;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json load_fixture(const std::string& name) {
    std::ifstream in(fs::path(VIZREC_FIXTURE_DIR) / name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return json::parse(in);
}

config::RunConfig build_config(const fs::path& repo, std::uint64_t seed) {
    config::RunConfig cfg;
    cfg.repo = repo.string();
    cfg.seed = seed;
    return cfg;
}

// ---------------------------------------------------------------------------

Outcome measure_oracles() {
    const auto t0 = Clock::now();
    const auto cases = load_fixture("measures_cases.json");
    double worst = 0.0;
    std::size_t n = 0, bad = 0;
    auto check = [&](double got, double want, double tol) {
        ++n;
        const double err = std::abs(got - want);
        worst = std::max(worst, err);
        if (!(err <= tol)) ++bad;
    };
    for (const auto& c : cases["cosine"]) {
        const auto u = c["u"].get<std::vector<double>>();
        const auto v = c["v"].get<std::vector<double>>();
        check(similarity::cosine_similarity(u, v), c["expected"].get<double>(), 1e-9);
    }
    for (const auto& c : cases["jsd"]) {
        models::TopicDistribution p{c["p"].get<std::vector<double>>()};
        models::TopicDistribution q{c["q"].get<std::vector<double>>()};
        check(similarity::jsd(p, q), c["jsd"].get<double>(), 1e-9);
        check(similarity::jsd_similarity(p, q), c["similarity"].get<double>(), 1e-9);
    }
    for (const auto& c : cases["tfidf"]) {
        std::vector<text::Document> corpus;
        for (const auto& toks : c["corpus"]) {
            corpus.push_back(testing::make_doc(fmt::format("d{}", corpus.size()), toks.get<std::vector<std::string>>()));
        }
        const auto model = models::fit_tfidf(corpus);
        const auto vec = models::tfidf_vector(model, testing::make_doc("q", c["query"].get<std::vector<std::string>>()));
        std::map<std::string, double> got;
        for (std::size_t i = 0; i < vec.size(); ++i) got[model.vocabulary.tokens[vec.indices[i]]] = vec.values[i];
        const auto want = c["expected"].get<std::map<std::string, double>>();
        ++n;
        if (got.size() != want.size()) {
            ++bad;
            continue;
        }
        for (const auto& [tok, w] : want) {
            const auto it = got.find(tok);
            check(it == got.end() ? std::nan("") : it->second, w, 1e-9);
        }
    }
    const auto& ex = cases["jsd_worked_example"];
    const double worked = similarity::jsd(models::TopicDistribution{ex["p"].get<std::vector<double>>()},
                                          models::TopicDistribution{ex["q"].get<std::vector<double>>()});
    check(worked, ex["jsd"].get<double>(), 1e-6);
    const double secs = seconds_since(t0);
    const bool enough = cases["cosine"].size() >= 100 && cases["jsd"].size() >= 100 && cases["tfidf"].size() >= 100;
    return {bad == 0 && enough && secs < 10.0,
            fmt::format("{} comparisons, {} out of tolerance, max abs err {:.3g}, worked example {:.6f}, {:.2f}s", n, bad,
                        worst, worked, secs)};
}

Outcome lsi_fidelity() {
    double cos_err = 0.0, sv_err = 0.0;
    int runs = 0;
    for (int k = 1; k <= 10; ++k) {
        for (std::uint64_t seed : {1ULL, 2ULL}) {
            Rng rng(1000 * k + seed);
            Eigen::MatrixXd u(50, k), v(200, k);
            for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
            for (int i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
            const Eigen::MatrixXd a = u * v.transpose();
            std::vector<models::SparseVector> rows(50);
            for (int r = 0; r < 50; ++r) {
                for (int c = 0; c < 200; ++c) {
                    if (a(r, c) != 0.0) {
                        rows[r].indices.push_back(static_cast<std::uint32_t>(c));
                        rows[r].values.push_back(a(r, c));
                    }
                }
            }
            models::LsiOptions lo;
            lo.k = k;
            lo.seed = seed;
            const auto fit = models::fit_lsi(rows, 200, lo);
            for (int i = 0; i < 50; ++i) {
                for (int j = i + 1; j < 50; ++j) {
                    const double full = a.row(i).dot(a.row(j)) / (a.row(i).norm() * a.row(j).norm());
                    const Eigen::VectorXd pi = fit.document_embedding.row(i), pj = fit.document_embedding.row(j);
                    const double proj = pi.dot(pj) / (pi.norm() * pj.norm());
                    cos_err = std::max(cos_err, std::abs(full - proj));
                }
            }
            Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
            const auto& sv = svd.singularValues();
            for (int i = 0; i < k; ++i) sv_err = std::max(sv_err, std::abs(sv(i) - fit.model.singular_values[i]));
            ++runs;
        }
    }
    return {cos_err <= 1e-6 && sv_err <= 1e-6,
            fmt::format("{} matrices (50x200, rank 1..10): max cosine err {:.3g}, max singular value err {:.3g}", runs,
                        cos_err, sv_err)};
}

Outcome lda_properties() {
    const auto t0 = Clock::now();
    testing::WordFactory words(77);
    const auto va = words.take(30), vb = words.take(30);
    Rng rng(5);
    std::vector<text::Document> docs;
    for (int d = 0; d < 100; ++d) {
        const auto& vocab = d % 2 == 0 ? va : vb;
        std::vector<std::string> toks;
        for (int i = 0; i < 120; ++i) toks.push_back(vocab[rng.below(vocab.size())]);
        docs.push_back(testing::make_doc(fmt::format("doc{:03}", d), toks));
    }
    models::LdaOptions lo;
    lo.k = 2;
    lo.seed = 11;
    const auto fit = models::fit_lda(docs, lo);
    const auto again = models::fit_lda(docs, lo);

    double norm_err = 0.0;
    const auto V = fit.model.vocab_size();
    for (int t = 0; t < fit.model.k; ++t) {
        double s = 0.0;
        for (std::size_t w = 0; w < V; ++w) s += fit.model.phi(t, w);
        norm_err = std::max(norm_err, std::abs(s - 1.0));
    }
    std::vector<models::TopicDistribution> inferred;
    for (const auto& d : docs) inferred.push_back(models::lda_infer(fit.model, d, 11));
    for (const auto* set : std::array<const std::vector<models::TopicDistribution>*, 2>{&fit.training_theta, &inferred}) {
        for (const auto& th : *set) {
            double s = 0.0;
            for (double p : th.probabilities) s += p;
            norm_err = std::max(norm_err, std::abs(s - 1.0));
        }
    }
    const bool deterministic = fit.model.topic_word == again.model.topic_word &&
                               fit.training_theta == again.training_theta &&
                               models::lda_infer(fit.model, docs[3], 11) == inferred[3];

    double within = 0.0, cross = 0.0;
    std::size_t nw = 0, nc = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t j = i + 1; j < docs.size(); ++j) {
            const double s = similarity::jsd_similarity(fit.training_theta[i], fit.training_theta[j]);
            if (i % 2 == j % 2) {
                within += s;
                ++nw;
            } else {
                cross += s;
                ++nc;
            }
        }
    }
    within /= static_cast<double>(nw);
    cross /= static_cast<double>(nc);
    const double secs = seconds_since(t0);
    return {norm_err <= 1e-9 && deterministic && within - cross >= 0.3 && secs < 60.0,
            fmt::format("max normalization err {:.3g}, deterministic {}, within {:.4f} vs cross {:.4f} (gap {:.4f}), "
                        "{:.2f}s",
                        norm_err, deterministic, within, cross, within - cross, secs)};
}

Outcome triplet_sampler() {
    testing::WordFactory words(901);
    std::vector<std::vector<std::string>> topics;
    for (int t = 0; t < 10; ++t) topics.push_back(words.take(25));
    Rng rng(902);
    std::vector<text::Document> docs;
    std::vector<std::size_t> strata;
    for (int d = 0; d < 500; ++d) {
        // Main topic plus a share of a neighbouring topic; lengths straddle the
        // word-count window on purpose.
        const auto main = rng.below(10);
        const auto side = (main + 1 + rng.below(2)) % 10;
        const double side_share = rng.uniform() * 0.6;
        const int len = 4 + static_cast<int>(rng.below(230));
        std::vector<std::string> toks;
        for (int i = 0; i < len; ++i) {
            const auto& v = rng.uniform() < side_share ? topics[side] : topics[main];
            toks.push_back(v[rng.below(v.size())]);
        }
        docs.push_back(testing::make_doc(fmt::format("doc{:03}", d), toks));
        strata.push_back(main);
    }
    const auto model = models::fit_tfidf(docs);
    std::map<std::string, models::SparseVector> vec;
    std::map<std::string, int> words_of;
    for (const auto& d : docs) {
        vec[d.workbook_id] = models::tfidf_vector(model, d);
        words_of[d.workbook_id] = d.total_tokens;
    }
    const eval::SamplerOptions o;
    std::size_t emitted = 0, violations = 0;
    std::string first;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto triplets = eval::sample_triplets(docs, strata, 100, seed);
        std::map<std::string, int> uses;
        for (const auto& t : triplets) {
            ++emitted;
            std::vector<std::string> problems;
            if (auto msg = eval::check_triplet(t, words_of, o); !msg.empty()) problems.push_back(msg);
            // Independent recomputation of the recorded baseline scores.
            for (const auto& [alt, rec] : {std::pair{t.alt_a, t.score_a}, std::pair{t.alt_b, t.score_b}}) {
                const double s = similarity::cosine_similarity(vec.at(t.reference), vec.at(alt));
                if (std::abs(s - rec) > 1e-12) problems.push_back("recorded score differs from recomputed");
                if (s < o.low || s > o.high) problems.push_back("score outside band");
            }
            for (const auto* id : {&t.reference, &t.alt_a, &t.alt_b}) {
                const int wc = words_of.at(*id);
                if (wc < o.min_words || wc > o.max_words) problems.push_back("word count outside window");
                ++uses[*id];
            }
            if (std::abs(t.score_a - t.score_b) < o.min_delta) problems.push_back("delta too small");
            if (!problems.empty()) {
                ++violations;
                if (first.empty()) first = t.id + ": " + problems.front();
            }
        }
        for (const auto& [id, n] : uses) {
            if (n > o.max_uses) {
                ++violations;
                if (first.empty()) first = fmt::format("seed {}: {} used {} times", seed, id, n);
            }
        }
    }
    return {violations == 0 && emitted == 2000,
            fmt::format("20 seeds x 100 triplets on 500 docs: {} emitted, {} violations{}", emitted, violations,
                        first.empty() ? "" : " (first: " + first + ")")};
}

Outcome kappa_suite() {
    using eval::Choice;
    // Unanimous raters on items whose category varies.
    std::vector<std::array<int, 2>> unanimous;
    for (int i = 0; i < 200; ++i) unanimous.push_back(i % 3 == 0 ? std::array{25, 0} : std::array{0, 25});
    const auto ku = eval::fleiss_kappa(unanimous);

    Rng rng(31337);
    std::vector<std::array<int, 2>> random(10000, {0, 0});
    for (auto& item : random) {
        for (int r = 0; r < 25; ++r) ++item[rng.below(2)];
    }
    const auto kr = eval::fleiss_kappa(random);

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 20 + rng.below(200);
        const double bias1 = rng.uniform(), bias2 = rng.uniform(), agree = rng.uniform();
        std::vector<Choice> r1, r2;
        std::vector<std::array<int, 2>> counts;
        for (std::size_t i = 0; i < n; ++i) {
            const Choice a = rng.uniform() < bias1 ? Choice::A : Choice::B;
            const Choice b = rng.uniform() < agree ? a : (rng.uniform() < bias2 ? Choice::A : Choice::B);
            r1.push_back(a);
            r2.push_back(b);
            counts.push_back({(a == Choice::A) + (b == Choice::A), (a == Choice::B) + (b == Choice::B)});
        }
        const auto f = eval::fleiss_kappa(counts);
        const auto c = eval::cohen_kappa(r1, r2);
        if (f.defined != c.defined) {
            worst = std::numeric_limits<double>::infinity();
        } else if (f.defined) {
            worst = std::max(worst, std::abs(f.kappa - c.kappa));
        }
    }
    const bool unanimous_ok = ku.defined && ku.kappa == 1.0;
    const bool random_ok = kr.defined && std::abs(kr.kappa) < 0.05;
    return {unanimous_ok && random_ok && worst <= 1e-12,
            fmt::format("unanimous kappa {} (exact 1: {}), random 25x10000 kappa {:.5f}, "
                        "max |fleiss(n=2) - cohen| over 100 random rater pairs {:.3g}",
                        ku.kappa, unanimous_ok, kr.kappa, worst)};
}

Outcome end_to_end_retrieval() {
    testing::SynthOptions so;
    so.seed = 2024;
    so.subthemes = 4;
    const auto repo = testing::make_topic_repo(so);
    const auto root = testing::temp_dir("e2e");
    testing::write_repo(repo.workbooks, root / "repo");
    std::map<std::string, int> topic_of;
    for (const auto& wb : repo.workbooks) topic_of[wb.id()] = wb.topic;

    const auto t0 = Clock::now();
    const auto report = service::build_index(build_config(root / "repo", 7), root / "bundle");
    const double secs = seconds_since(t0);
    if (!report.success) return {false, "build failed: " + report.failure};
    const auto bundle = service::Bundle::load(root / "bundle");

    double sum = 0.0;
    std::size_t short_lists = 0;
    for (const auto& [id, topic] : topic_of) {
        const auto& related = bundle.neighbors(id, similarity::Facet::Related);
        int hits = 0;
        for (std::size_t i = 0; i < related.size() && i < 5; ++i) hits += topic_of.at(related[i].id) == topic;
        short_lists += related.size() < 5;
        sum += hits / 5.0;
    }
    const double p5 = sum / static_cast<double>(topic_of.size());
    fs::remove_all(root);
    return {p5 >= 0.8 && secs < 60.0,
            fmt::format("200 workbooks / 10 topics: RELATED precision@5 {:.4f} ({} lists shorter than 5), build {:.1f}s",
                        p5, short_lists, secs)};
}

struct CloneFixture {
    fs::path root;
    std::string base_id;
    std::vector<std::string> clone_ids;
};

CloneFixture make_clone_repo(const std::string& tag) {
    testing::SynthOptions so;
    so.seed = 4242;
    so.per_topic = 10;
    auto repo = testing::make_topic_repo(so);
    std::vector<std::string> all_words = repo.background;
    for (const auto& tw : repo.topic_words) all_words.insert(all_words.end(), tw.begin(), tw.end());
    CloneFixture fx;
    fx.root = testing::temp_dir(tag);
    const auto base = repo.workbooks.front();
    fx.base_id = base.id();
    for (int i = 0; i < 20; ++i) {
        const double fraction = 0.10 * (i + 1) / 20.0;
        auto clone = testing::perturbed_clone(base, fmt::format("clones/copy{:02}.twb", i), fraction, all_words, 600 + i);
        fx.clone_ids.push_back(clone.id());
        repo.workbooks.push_back(std::move(clone));
    }
    testing::write_repo(repo.workbooks, fx.root / "repo");
    return fx;
}

Outcome near_duplicates() {
    const auto fx = make_clone_repo("dup");
    const auto report = service::build_index(build_config(fx.root / "repo", 7), fx.root / "bundle");
    if (!report.success) return {false, "build failed: " + report.failure};
    const auto bundle = service::Bundle::load(fx.root / "bundle");

    std::vector<std::string> family = fx.clone_ids;
    family.push_back(fx.base_id);
    const std::set<std::string> fam(family.begin(), family.end());
    std::set<std::string> groups;
    std::size_t group_size = 0;
    for (const auto& id : family) {
        const auto* g = bundle.group_of(id);
        groups.insert(g ? g->group_id : "<none>");
        if (g) group_size = g->member_ids.size();
    }
    const bool one_group = groups.size() == 1 && !groups.count("<none>");

    std::size_t in_related = 0, missing_versions = 0;
    auto ids_of = [](const std::vector<similarity::Neighbor>& list) {
        std::set<std::string> s;
        for (const auto& n : list) s.insert(n.id);
        return s;
    };
    const auto base_versions = ids_of(bundle.neighbors(fx.base_id, similarity::Facet::Versions));
    for (const auto& c : fx.clone_ids) missing_versions += !base_versions.count(c);
    for (const auto& id : family) {
        const auto related = ids_of(bundle.neighbors(id, similarity::Facet::Related));
        for (const auto& other : fam) in_related += related.count(other);
        if (id != fx.base_id && !ids_of(bundle.neighbors(id, similarity::Facet::Versions)).count(fx.base_id)) {
            ++missing_versions;
        }
    }
    fs::remove_all(fx.root);

    // MinHash superset check against brute-force Jaccard.
    testing::WordFactory words(313);
    const auto vocab = words.take(400);
    Rng rng(314);
    std::vector<std::vector<std::string>> bases;
    for (int b = 0; b < 25; ++b) {
        std::vector<std::string> toks;
        while (toks.size() < 40) {
            const auto& w = vocab[rng.below(vocab.size())];
            if (std::find(toks.begin(), toks.end(), w) == toks.end()) toks.push_back(w);
        }
        bases.push_back(toks);
    }
    std::vector<text::Document> docs;
    for (int b = 0; b < 25; ++b) docs.push_back(testing::make_doc(fmt::format("m{:03}", docs.size()), bases[b]));
    while (docs.size() < 100) {
        auto toks = bases[rng.below(bases.size())];
        const auto edits = rng.below(9);
        for (std::size_t e = 0; e < edits; ++e) toks[rng.below(toks.size())] = vocab[rng.below(vocab.size())];
        docs.push_back(testing::make_doc(fmt::format("m{:03}", docs.size()), toks));
    }
    std::vector<similarity::MinHashSignature> sigs;
    for (const auto& d : docs) sigs.push_back(similarity::minhash_signature(d, 99));
    const auto cands = similarity::minhash_candidates(sigs, 0.8);
    std::size_t pairs = 0, missed = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t j = i + 1; j < docs.size(); ++j) {
            // Brute-force Jaccard over token sets.
            std::set<std::string> a, b, u;
            for (const auto& [t, c] : docs[i].counts) a.insert(t);
            for (const auto& [t, c] : docs[j].counts) b.insert(t);
            std::size_t inter = 0;
            for (const auto& t : a) inter += b.count(t);
            const double jac = static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
            if (jac >= 0.8) {
                ++pairs;
                missed += !cands.count({i, j});
            }
        }
    }
    return {one_group && in_related == 0 && missing_versions == 0 && missed == 0 && pairs > 0,
            fmt::format("clone family of 21 in one group: {} (group size {}), family members under RELATED {}, "
                        "missing VERSIONS entries {}; MinHash missed {} of {} pairs with Jaccard >= 0.8",
                        one_group, group_size, in_related, missing_versions, missed, pairs)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).generic_string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

Outcome determinism() {
    const auto fx = make_clone_repo("det");
    auto cfg = build_config(fx.root / "repo", 19);
    cfg.minhash = true;
    const auto r1 = service::build_index(cfg, fx.root / "b1");
    const auto r2 = service::build_index(cfg, fx.root / "b2");
    const auto t1 = read_tree(fx.root / "b1"), t2 = read_tree(fx.root / "b2");
    std::size_t bytes = 0;
    for (const auto& [name, content] : t1) bytes += content.size();
    std::string first_diff;
    for (const auto& [name, content] : t1) {
        const auto it = t2.find(name);
        if (it == t2.end() || it->second != content) {
            first_diff = name;
            break;
        }
    }
    fs::remove_all(fx.root);
    const bool same = t1 == t2 && !t1.empty();
    return {r1.success && r2.success && same,
            fmt::format("{} files, {} bytes, byte-identical {}{}", t1.size(), bytes, same,
                        first_diff.empty() ? "" : " (first difference " + first_diff + ")")};
}

// A tag token: a query guaranteed to match something.
std::string repo_query(const service::Bundle& bundle) { return bundle.tags().at(1).tag; }

Outcome http_equivalence() {
    const auto fx = make_clone_repo("http");
    const auto report = service::build_index(build_config(fx.root / "repo", 7), fx.root / "bundle");
    if (!report.success) return {false, "build failed: " + report.failure};
    const auto bundle = service::Bundle::load(fx.root / "bundle");
    service::Api api(bundle);
    service::ServerOptions so;
    so.port = 0;
    service::Server server(bundle, so);
    const int port = server.start_background();
    httplib::Client client("127.0.0.1", port);

    const auto& wbs = bundle.workbooks();
    const auto& tag = bundle.tags().front().tag;
    const std::string some_author = wbs[3].author;
    struct Case {
        std::string path;
        std::multimap<std::string, std::string> params;
        std::function<json()> library;  // direct call; empty for error cases
        int status = 200;
    };
    std::vector<Case> cases = {
        {"/healthz", {}, [&] { return api.healthz(); }},
        {"/workbooks", {}, [&] { return api.list_workbooks(0, 24); }},
        {"/workbooks", {{"limit", "7"}, {"page", "3"}}, [&] { return api.list_workbooks(14, 7); }},
        {"/workbooks", {{"limit", "500"}, {"offset", "5"}}, [&] { return api.list_workbooks(5, 100); }},
        {"/tags", {}, [&] { return api.tags(); }},
        {"/tags/" + tag + "/workbooks", {{"limit", "5"}}, [&] { return api.tag_workbooks(tag, 0, 5); }},
        {"/search", {{"q", repo_query(bundle)}}, [&] { return api.search(repo_query(bundle), 24); }},
        {"/search", {{"q", some_author.substr(0, 3)}}, [&] { return api.search(some_author.substr(0, 3), 24); }},
        {"/search", {{"q", "zzzzqqq"}}, [&] { return api.search("zzzzqqq", 24); }},
        {"/workbooks/nope", {}, {}, 404},
        {"/workbooks/" + fx.base_id + "/recommendations", {}, {}, 400},
        {"/workbooks/" + fx.base_id + "/recommendations", {{"facet", "sideways"}}, {}, 400},
        {"/workbooks", {{"limit", "-3"}}, {}, 400},
        {"/nowhere", {}, {}, 404},
    };
    std::vector<std::string> sample_ids = {fx.base_id, fx.clone_ids[4], wbs[10].id, wbs[57].id, wbs.back().id};
    for (const auto& id : sample_ids) {
        cases.push_back({"/workbooks/" + id, {}, [&api, id] { return api.workbook(id); }});
        cases.push_back({"/workbooks/" + id + "/group", {}, [&api, id] { return api.group(id); }});
        for (auto f : similarity::kAllFacets) {
            const std::string name(similarity::to_string(f));
            cases.push_back({"/workbooks/" + id + "/recommendations", {{"facet", name}},
                             [&api, id, f] { return api.recommendations(id, f, 24, 0); }});
            cases.push_back({"/workbooks/" + id + "/recommendations", {{"facet", name}, {"limit", "3"}, {"page", "2"}},
                             [&api, id, f] { return api.recommendations(id, f, 3, 3); }});
        }
    }

    std::size_t checked = 0, mismatched = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        ++mismatched;
        if (first.empty()) first = what;
    };
    for (const auto& c : cases) {
        httplib::Params hp(c.params.begin(), c.params.end());
        const auto res = client.Get(c.path, hp, httplib::Headers{});
        ++checked;
        if (!res) {
            fail(c.path + ": no response");
            continue;
        }
        const auto body = json::parse(res->body);
        const auto routed = api.route(c.path, c.params);
        if (res->status != c.status || routed.status != c.status) fail(fmt::format("{}: status {}", c.path, res->status));
        if (body != routed.body) fail(c.path + ": body differs from routed call");
        if (c.library && body != c.library()) fail(c.path + ": body differs from library call");
        if (!c.library && (!body.contains("code") || !body.contains("message"))) fail(c.path + ": error body shape");
    }

    // Recommendation bodies also agree with the raw library ranking.
    for (const auto& id : sample_ids) {
        for (auto f : similarity::kAllFacets) {
            httplib::Params hp{{"facet", std::string(similarity::to_string(f))}, {"limit", "100"}};
            const auto res = client.Get("/workbooks/" + id + "/recommendations", hp, httplib::Headers{});
            const auto body = json::parse(res->body);
            const auto page = service::recommend(bundle, id, f, 100);
            ++checked;
            bool same = body["total"] == page.total && body["items"].size() == page.items.size();
            for (std::size_t i = 0; same && i < page.items.size(); ++i) {
                same = body["items"][i]["workbook"]["id"] == page.items[i].workbook->id &&
                       body["items"][i]["score"].get<double>() == page.items[i].score;
            }
            if (!same) fail("recommend() differs for " + id);
        }
    }
    server.stop();
    fs::remove_all(fx.root);
    return {mismatched == 0, fmt::format("{} endpoint checks, {} mismatches{}", checked, mismatched,
                                         first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"measure-oracles", measure_oracles},
        {"lsi-fidelity", lsi_fidelity},
        {"lda-properties", lda_properties},
        {"triplet-sampler", triplet_sampler},
        {"kappa-suite", kappa_suite},
        {"end-to-end-retrieval", end_to_end_retrieval},
        {"near-duplicates", near_duplicates},
        {"determinism", determinism},
        {"http-equivalence", http_equivalence},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += !out.pass;
        std::cout << fmt::format("[{}] criterion {} {}: {}", out.pass ? "PASS" : "FAIL", number, criteria[i].first,
                                 out.detail)
                  << std::endl;
    }
    return failures;
}
