#include "vizrec/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/model_io.hpp"
#include "vizrec/parallel.hpp"
#include "vizrec/tfidf.hpp"

namespace vizrec::eval {

char to_char(Choice c) noexcept { return c == Choice::A ? 'A' : 'B'; }

std::optional<Choice> choice_from_string(std::string_view s) noexcept {
    if (s == "A" || s == "a") return Choice::A;
    if (s == "B" || s == "b") return Choice::B;
    return std::nullopt;
}

namespace {

Choice other(Choice c) { return c == Choice::A ? Choice::B : Choice::A; }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::vector<Triplet> sample_triplets(std::span<const SamplerDoc> docs,
                                     const std::function<double(std::size_t, std::size_t)>& score, std::size_t n,
                                     std::uint64_t seed, const SamplerOptions& o) {
    Rng rng(seed);
    std::vector<std::size_t> eligible;
    std::map<std::size_t, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].word_count < o.min_words || docs[i].word_count > o.max_words) continue;
        eligible.push_back(i);
        strata[docs[i].stratum].push_back(i);
    }
    std::vector<std::deque<std::size_t>> queues;
    for (auto& [s, members] : strata) {
        shuffle(members, rng);
        queues.emplace_back(members.begin(), members.end());
    }

    std::vector<int> uses(docs.size(), 0);
    std::vector<Triplet> out;

    struct Partner {
        std::size_t doc;
        double score;
    };
    auto try_form = [&](std::size_t r) -> bool {
        std::vector<Partner> partners;
        double min_score = std::numeric_limits<double>::infinity();
        for (std::size_t j : eligible) {
            if (j == r || uses[j] >= o.max_uses) continue;
            const double s = score(r, j);
            if (s < o.low || s > o.high) continue;
            partners.push_back({j, s});
            min_score = std::min(min_score, s);
        }
        std::vector<const Partner*> tops;
        for (const auto& p : partners) {
            if (p.score - min_score >= o.min_delta) tops.push_back(&p);
        }
        if (tops.empty()) return false;
        const Partner& hi = *tops[rng.below(tops.size())];
        std::vector<const Partner*> lows;
        for (const auto& p : partners) {
            if (hi.score - p.score >= o.min_delta) lows.push_back(&p);
        }
        const Partner& lo = *lows[rng.below(lows.size())];

        Triplet t;
        t.id = fmt::format("t{:05d}", out.size() + 1);
        t.reference = docs[r].id;
        const bool hi_first = rng.below(2) == 0;
        const Partner& a = hi_first ? hi : lo;
        const Partner& b = hi_first ? lo : hi;
        t.alt_a = docs[a.doc].id;
        t.alt_b = docs[b.doc].id;
        t.score_a = a.score;
        t.score_b = b.score;
        ++uses[r];
        ++uses[a.doc];
        ++uses[b.doc];
        out.push_back(std::move(t));
        return true;
    };

    // Partner sets only shrink as usage grows, so a reference that fails once
    // can never succeed later and is dropped for good.
    while (out.size() < n) {
        bool progressed = false;
        for (auto& q : queues) {
            if (out.size() >= n) break;
            while (!q.empty()) {
                const std::size_t r = q.front();
                q.pop_front();
                if (uses[r] >= o.max_uses) continue;
                if (try_form(r)) {
                    if (uses[r] < o.max_uses) q.push_back(r);
                    progressed = true;
                    break;
                }
            }
        }
        if (!progressed) {
            throw Error(ErrorCode::InsufficientCorpus,
                        fmt::format("only {} of {} triplets satisfy the sampling constraints ({} eligible documents)",
                                    out.size(), n, eligible.size()));
        }
    }
    return out;
}

std::vector<Triplet> sample_triplets(std::span<const text::Document> docs, std::span<const std::size_t> strata,
                                     std::size_t n, std::uint64_t seed, const SamplerOptions& options) {
    if (strata.size() != docs.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} strata for {} documents", strata.size(), docs.size()));
    }
    if (docs.empty()) throw Error(ErrorCode::InsufficientCorpus, "no documents to sample from");
    const auto model = models::fit_tfidf(docs);
    std::vector<models::SparseVector> vectors;
    std::vector<SamplerDoc> sdocs;
    vectors.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        vectors.push_back(models::tfidf_vector(model, docs[i]));
        sdocs.push_back({docs[i].workbook_id, docs[i].total_tokens, strata[i]});
    }
    // Vectors are unit length (or empty), so the dot product is the cosine.
    auto score = [&](std::size_t i, std::size_t j) { return vectors[i].dot(vectors[j]); };
    return sample_triplets(sdocs, score, n, seed, options);
}

std::string check_triplet(const Triplet& t, const std::map<std::string, int>& word_counts,
                          const SamplerOptions& o) {
    if (t.reference == t.alt_a || t.reference == t.alt_b || t.alt_a == t.alt_b) return "ids not distinct";
    for (double s : {t.score_a, t.score_b}) {
        if (s < o.low || s > o.high) return fmt::format("score {} outside [{}, {}]", s, o.low, o.high);
    }
    if (std::abs(t.score_a - t.score_b) < o.min_delta) {
        return fmt::format("score delta {} below {}", std::abs(t.score_a - t.score_b), o.min_delta);
    }
    for (const auto* id : {&t.reference, &t.alt_a, &t.alt_b}) {
        const auto it = word_counts.find(*id);
        if (it == word_counts.end()) return "unknown document " + *id;
        if (it->second < o.min_words || it->second > o.max_words) {
            return fmt::format("document {} has {} words", *id, it->second);
        }
    }
    return {};
}

Prediction model_2afc(const scoring::Scorer& scorer, const Triplet& t) {
    Prediction p;
    try {
        p.score_a = scorer.score(t.reference, t.alt_a);
        p.score_b = scorer.score(t.reference, t.alt_b);
    } catch (const Error& e) {
        throw Error(ErrorCode::ScoringFailure, fmt::format("triplet {} under {}: {}", t.id, scorer.tag(), e.what()));
    }
    p.tie = p.score_a == p.score_b;
    p.choice = p.score_a >= p.score_b ? Choice::A : Choice::B;
    return p;
}

std::set<std::string> JudgementSet::raters() const {
    std::set<std::string> out;
    for (const auto& [tid, by_rater] : votes) {
        for (const auto& [rid, c] : by_rater) out.insert(rid);
    }
    return out;
}

KappaResult fleiss_kappa(std::span<const std::array<int, 2>> counts) {
    if (counts.empty()) throw Error(ErrorCode::DegenerateInput, "fleiss kappa needs at least one item");
    const int n = counts[0][0] + counts[0][1];
    if (n < 2) throw Error(ErrorCode::DegenerateInput, "fleiss kappa needs at least two raters per item");
    double p_bar = 0.0;
    double total_a = 0.0;
    for (const auto& row : counts) {
        if (row[0] < 0 || row[1] < 0 || row[0] + row[1] != n) {
            throw Error(ErrorCode::DegenerateInput, "every item needs the same number of ratings");
        }
        p_bar += static_cast<double>(row[0] * row[0] + row[1] * row[1] - n) / (static_cast<double>(n) * (n - 1));
        total_a += row[0];
    }
    const double n_items = static_cast<double>(counts.size());
    p_bar /= n_items;
    const double pa = total_a / (n_items * n);
    const double pb = 1.0 - pa;
    KappaResult r;
    r.n_items = counts.size();
    r.n_raters = static_cast<std::size_t>(n);
    r.observed_agreement = p_bar;
    r.expected_agreement = pa * pa + pb * pb;
    if (r.expected_agreement >= 1.0) {
        r.defined = false;
        r.kappa = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.kappa = (p_bar - r.expected_agreement) / (1.0 - r.expected_agreement);
    }
    return r;
}

KappaResult fleiss_kappa(const JudgementSet& judgements) {
    std::vector<std::array<int, 2>> counts;
    for (const auto& [tid, by_rater] : judgements.votes) {
        std::array<int, 2> row{0, 0};
        for (const auto& [rid, c] : by_rater) ++row[c == Choice::A ? 0 : 1];
        counts.push_back(row);
    }
    return fleiss_kappa(counts);
}

KappaResult cohen_kappa(std::span<const Choice> r1, std::span<const Choice> r2) {
    if (r1.size() != r2.size()) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("{} vs {} ratings", r1.size(), r2.size()));
    }
    if (r1.empty()) throw Error(ErrorCode::DegenerateInput, "cohen kappa needs at least one item");
    std::size_t agree = 0, a1 = 0, a2 = 0;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        agree += r1[i] == r2[i];
        a1 += r1[i] == Choice::A;
        a2 += r2[i] == Choice::A;
    }
    const double n = static_cast<double>(r1.size());
    const double p1 = a1 / n, p2 = a2 / n;
    KappaResult r;
    r.n_items = r1.size();
    r.n_raters = 2;
    r.observed_agreement = agree / n;
    r.expected_agreement = p1 * p2 + (1.0 - p1) * (1.0 - p2);
    if (r.expected_agreement >= 1.0) {
        r.defined = false;
        r.kappa = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.kappa = (r.observed_agreement - r.expected_agreement) / (1.0 - r.expected_agreement);
    }
    return r;
}

std::vector<ConsensusClass> consensus(const JudgementSet& judgements, const GoldLabels& gold) {
    std::vector<ConsensusClass> out;
    for (const auto& [tid, by_rater] : judgements.votes) {
        std::size_t na = 0;
        for (const auto& [rid, c] : by_rater) na += c == Choice::A;
        const std::size_t nb = by_rater.size() - na;
        ConsensusClass cc;
        cc.triplet_id = tid;
        cc.majority = na >= nb ? Choice::A : Choice::B;
        cc.vote_fraction = by_rater.empty() ? 0.0 : static_cast<double>(std::max(na, nb)) / by_rater.size();
        cc.high = cc.vote_fraction >= kHighConsensus;
        if (const auto g = gold.find(tid); g != gold.end() && g->second != cc.majority) cc.high = false;
        out.push_back(std::move(cc));
    }
    return out;
}

AgreementReport agreement_report(std::span<const Triplet> triplets, const JudgementSet& judgements,
                                 const GoldLabels& gold, std::span<const scoring::Scorer* const> scorers,
                                 unsigned workers) {
    AgreementReport report;
    std::vector<const Triplet*> judged;
    JudgementSet used;
    for (const auto& t : triplets) {
        const auto it = judgements.votes.find(t.id);
        if (it == judgements.votes.end()) continue;
        judged.push_back(&t);
        report.triplet_ids.push_back(t.id);
        used.votes.insert(*it);
    }
    const auto classes = consensus(used, gold);
    std::map<std::string, const ConsensusClass*> by_id;
    for (const auto& c : classes) by_id[c.triplet_id] = &c;
    for (const auto& id : report.triplet_ids) report.consensus.push_back(*by_id.at(id));
    if (!judged.empty()) report.inter_rater = fleiss_kappa(used);

    const std::size_t m = scorers.size(), n = judged.size();
    std::vector<Prediction> flat(m * n);
    parallel_for(m * n, workers, [&](std::size_t i) { flat[i] = model_2afc(*scorers[i / n], *judged[i % n]); });

    std::vector<Choice> majority;
    for (const auto& c : report.consensus) majority.push_back(c.majority);

    auto split = [&](const std::vector<Choice>& preds, bool high) -> std::optional<KappaResult> {
        std::vector<Choice> p, q;
        for (std::size_t i = 0; i < n; ++i) {
            if (report.consensus[i].high != high) continue;
            p.push_back(preds[i]);
            q.push_back(majority[i]);
        }
        if (p.empty()) return std::nullopt;
        return cohen_kappa(p, q);
    };

    std::vector<std::vector<Choice>> choices(m);
    for (std::size_t s = 0; s < m; ++s) {
        ModelAgreement ma;
        ma.tag = scorers[s]->tag();
        ma.predictions.assign(flat.begin() + s * n, flat.begin() + (s + 1) * n);
        for (const auto& p : ma.predictions) {
            choices[s].push_back(p.choice);
            ma.ties += p.tie;
        }
        if (n > 0) {
            ma.overall = cohen_kappa(choices[s], majority);
            ma.high = split(choices[s], true);
            ma.low = split(choices[s], false);
        }
        report.models.push_back(std::move(ma));
    }
    report.model_matrix.assign(m, std::vector<KappaResult>(m));
    if (n > 0) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) report.model_matrix[i][j] = cohen_kappa(choices[i], choices[j]);
        }
    }
    return report;
}

namespace {

nlohmann::json kappa_json(const KappaResult& k) {
    return {
        {"kappa", k.defined ? nlohmann::json(k.kappa) : nlohmann::json(nullptr)},
        {"n_items", k.n_items},
        {"n_raters", k.n_raters},
        {"observed_agreement", k.observed_agreement},
        {"expected_agreement", k.expected_agreement},
    };
}

nlohmann::json kappa_json(const std::optional<KappaResult>& k) { return k ? kappa_json(*k) : nlohmann::json(nullptr); }

std::string kappa_cell(const std::optional<KappaResult>& k) {
    if (!k) return "-";
    if (!k->defined) return "undef";
    return fmt::format("{:.3f}", k->kappa);
}

}  // namespace

nlohmann::json AgreementReport::to_json() const {
    std::size_t n_high = 0;
    for (const auto& c : consensus) n_high += c.high;
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["n_triplets"] = triplet_ids.size();
    j["consensus"] = {{"high", n_high}, {"low", triplet_ids.size() - n_high}};
    j["inter_rater"] = kappa_json(inter_rater);
    j["models"] = nlohmann::json::array();
    for (const auto& m : models) {
        nlohmann::json preds = nlohmann::json::array();
        for (std::size_t i = 0; i < m.predictions.size(); ++i) {
            const auto& p = m.predictions[i];
            preds.push_back({{"triplet_id", triplet_ids[i]},
                             {"choice", std::string(1, to_char(p.choice))},
                             {"tie", p.tie},
                             {"score_a", p.score_a},
                             {"score_b", p.score_b}});
        }
        j["models"].push_back({{"tag", m.tag},
                               {"ties", m.ties},
                               {"overall", kappa_json(m.overall)},
                               {"high", kappa_json(m.high)},
                               {"low", kappa_json(m.low)},
                               {"predictions", std::move(preds)}});
    }
    nlohmann::json tags = nlohmann::json::array(), matrix = nlohmann::json::array();
    for (std::size_t i = 0; i < models.size(); ++i) {
        tags.push_back(models[i].tag);
        nlohmann::json row = nlohmann::json::array();
        for (const auto& k : model_matrix[i]) row.push_back(k.defined ? nlohmann::json(k.kappa) : nlohmann::json(nullptr));
        matrix.push_back(std::move(row));
    }
    j["model_matrix"] = {{"tags", std::move(tags)}, {"kappa", std::move(matrix)}};
    std::vector<nlohmann::json> cons;
    for (const auto& c : consensus) {
        cons.push_back({{"triplet_id", c.triplet_id},
                        {"class", c.high ? "high" : "low"},
                        {"majority", std::string(1, to_char(c.majority))},
                        {"vote_fraction", c.vote_fraction}});
    }
    j["triplets"] = std::move(cons);
    return j;
}

std::string AgreementReport::console_table() const {
    std::string out = fmt::format("{} triplets, inter-rater fleiss kappa {}\n", triplet_ids.size(),
                                  kappa_cell(std::optional<KappaResult>(inter_rater)));
    out += fmt::format("{:<16} {:>8} {:>8} {:>8} {:>6}\n", "model", "overall", "high", "low", "ties");
    for (const auto& m : models) {
        out += fmt::format("{:<16} {:>8} {:>8} {:>8} {:>6}\n", m.tag, kappa_cell(m.overall), kappa_cell(m.high),
                           kappa_cell(m.low), m.ties);
    }
    return out;
}

JudgementSet synthetic_judgements(std::span<const Triplet> triplets, std::span<const Choice> truth,
                                  std::uint64_t seed, const SyntheticRaterOptions& o) {
    if (truth.size() != triplets.size()) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("{} labels for {} triplets", truth.size(), triplets.size()));
    }
    Rng rng(seed);
    std::vector<double> accuracy(static_cast<std::size_t>(o.n_raters));
    for (auto& a : accuracy) a = o.min_accuracy + (o.max_accuracy - o.min_accuracy) * rng.uniform();
    JudgementSet js;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const bool hard = rng.uniform() < o.hard_fraction;
        for (int r = 0; r < o.n_raters; ++r) {
            const double p = hard ? o.hard_accuracy : accuracy[static_cast<std::size_t>(r)];
            const Choice c = rng.uniform() < p ? truth[i] : other(truth[i]);
            js.add(triplets[i].id, fmt::format("r{:02d}", r + 1), c);
        }
    }
    return js;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Calls row(fields, line_no) for each data row after validating the header.
template <typename Fn>
void read_csv(const std::filesystem::path& path, std::string_view header, Fn row) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    const auto expected = split_csv_line(header);
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (!seen_header) {
            if (fields != expected) {
                throw Error(ErrorCode::MalformedCsv,
                            fmt::format("{}: expected header '{}'", path.string(), header));
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != expected.size()) {
            throw Error(ErrorCode::MalformedCsv, fmt::format("{} line {}: expected {} fields, got {}", path.string(),
                                                             line_no, expected.size(), fields.size()));
        }
        row(fields, line_no);
    }
    if (!seen_header) throw Error(ErrorCode::MalformedCsv, path.string() + ": missing header");
}

Choice parse_choice(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
    const auto c = choice_from_string(s);
    if (!c) throw Error(ErrorCode::MalformedCsv, fmt::format("{} line {}: choice must be A or B", path.string(), line_no));
    return *c;
}

double parse_real(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
        throw Error(ErrorCode::MalformedCsv, fmt::format("{} line {}: bad number '{}'", path.string(), line_no, s));
    }
    return v;
}

constexpr std::string_view kTripletHeader = "triplet_id,reference,alt_a,alt_b,score_a,score_b";
constexpr std::string_view kJudgementHeader = "triplet_id,rater_id,choice";
constexpr std::string_view kGoldHeader = "triplet_id,choice";

}  // namespace

std::vector<Triplet> read_triplets_csv(const std::filesystem::path& path) {
    std::vector<Triplet> out;
    read_csv(path, kTripletHeader, [&](const std::vector<std::string>& f, std::size_t line_no) {
        out.push_back({f[0], f[1], f[2], f[3], parse_real(f[4], path, line_no), parse_real(f[5], path, line_no)});
    });
    return out;
}

std::string triplets_csv(std::span<const Triplet> triplets) {
    std::string out(kTripletHeader);
    out += '\n';
    for (const auto& t : triplets) {
        out += fmt::format("{},{},{},{},{},{}\n", t.id, t.reference, t.alt_a, t.alt_b, t.score_a, t.score_b);
    }
    return out;
}

void write_triplets_csv(const std::filesystem::path& path, std::span<const Triplet> triplets) {
    io::write_file_bytes(path, triplets_csv(triplets));
}

JudgementSet read_judgements_csv(const std::filesystem::path& path) {
    JudgementSet js;
    read_csv(path, kJudgementHeader, [&](const std::vector<std::string>& f, std::size_t line_no) {
        js.add(f[0], f[1], parse_choice(f[2], path, line_no));
    });
    return js;
}

void write_judgements_csv(const std::filesystem::path& path, const JudgementSet& judgements) {
    std::string out(kJudgementHeader);
    out += '\n';
    for (const auto& [tid, by_rater] : judgements.votes) {
        for (const auto& [rid, c] : by_rater) out += fmt::format("{},{},{}\n", tid, rid, to_char(c));
    }
    io::write_file_bytes(path, out);
}

GoldLabels read_gold_csv(const std::filesystem::path& path) {
    GoldLabels gold;
    read_csv(path, kGoldHeader, [&](const std::vector<std::string>& f, std::size_t line_no) {
        gold[f[0]] = parse_choice(f[1], path, line_no);
    });
    return gold;
}

void write_gold_csv(const std::filesystem::path& path, const GoldLabels& gold) {
    std::string out(kGoldHeader);
    out += '\n';
    for (const auto& [tid, c] : gold) out += fmt::format("{},{}\n", tid, to_char(c));
    io::write_file_bytes(path, out);
}

std::set<std::string> read_exclusion_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        out.insert(line.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace vizrec::eval
