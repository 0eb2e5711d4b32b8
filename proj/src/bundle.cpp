#include <algorithm>
#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"
#include "vizrec/index.hpp"
#include "vizrec/model_io.hpp"
#include "vizrec/bundle_files.hpp"

namespace vizrec::service {

using nlohmann::json;

json WorkbookMeta::to_json() const {
    return {
        {"id", id},
        {"title", title},
        {"author", author},
        {"modified_date", modified_date},
        {"language", language},
        {"source_path", source_path},
        {"n_views", n_views},
        {"n_dashboards", n_dashboards},
        {"n_columns", n_columns},
        {"has_marks", has_marks},
        {"total_tokens", total_tokens},
        {"unique_tokens", unique_tokens},
        {"eligible", eligible},
        {"exclusion", exclusion.empty() ? json(nullptr) : json(exclusion)},
        {"glyph", {{"initials", glyph}, {"color", glyph_color}}},
    };
}

WorkbookMeta WorkbookMeta::from_json(const json& j) {
    WorkbookMeta m;
    m.id = j.at("id").get<std::string>();
    m.title = j.at("title").get<std::string>();
    m.author = j.at("author").get<std::string>();
    m.modified_date = j.at("modified_date").get<std::string>();
    m.language = j.at("language").get<std::string>();
    m.source_path = j.at("source_path").get<std::string>();
    m.n_views = j.at("n_views").get<int>();
    m.n_dashboards = j.at("n_dashboards").get<int>();
    m.n_columns = j.at("n_columns").get<int>();
    m.has_marks = j.at("has_marks").get<bool>();
    m.total_tokens = j.at("total_tokens").get<int>();
    m.unique_tokens = j.at("unique_tokens").get<int>();
    m.eligible = j.at("eligible").get<bool>();
    m.exclusion = j.at("exclusion").is_null() ? "" : j.at("exclusion").get<std::string>();
    m.glyph = j.at("glyph").at("initials").get<std::string>();
    m.glyph_color = j.at("glyph").at("color").get<std::string>();
    return m;
}

json BuildReport::to_json() const {
    json issues_json = json::array();
    for (const auto& i : issues) {
        issues_json.push_back({{"path", i.path}, {"code", std::string(vizrec::to_string(i.code))}, {"message", i.message}});
    }
    return {
        {"format_version", kBundleFormatVersion},
        {"success", success},
        {"failure", failure.empty() ? json(nullptr) : json(failure)},
        {"files_seen", files_seen},
        {"parsed", parsed},
        {"eligible", eligible},
        {"excluded", excluded},
        {"issues", std::move(issues_json)},
        {"warnings", warnings},
        {"groups", groups},
        {"neighbor_counts", neighbor_counts},
    };
}

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptArtifact, what); }

std::vector<json> read_jsonl(const std::string& bytes, const std::string& name) {
    std::vector<json> out;
    std::size_t start = 0, line = 0;
    while (start < bytes.size()) {
        const auto nl = bytes.find('\n', start);
        const auto text = std::string_view(bytes).substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        ++line;
        if (!text.empty()) {
            try {
                out.push_back(json::parse(text));
            } catch (const json::exception& e) {
                corrupt(fmt::format("{} line {}: {}", name, line, e.what()));
            }
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

}  // namespace

Bundle Bundle::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "no bundle at " + dir.string());
    Bundle b;
    try {
        b.manifest_ = json::parse(io::read_file_bytes(dir / files::kManifest));
    } catch (const json::exception& e) {
        corrupt(std::string("manifest: ") + e.what());
    }
    try {
        if (b.manifest_.at("format_version").get<int>() != kBundleFormatVersion) {
            corrupt("unsupported bundle format version");
        }
        std::map<std::string, std::string> contents;
        for (const auto& [name, digest] : b.manifest_.at("files").items()) {
            auto bytes = io::read_file_bytes(dir / name);
            if (hex64(fnv1a64(bytes)) != digest.get<std::string>()) corrupt("checksum mismatch for " + name);
            contents.emplace(name, std::move(bytes));
        }
        auto file = [&](const char* name) -> const std::string& {
            const auto it = contents.find(name);
            if (it == contents.end()) corrupt(std::string("bundle lacks ") + name);
            return it->second;
        };

        for (const auto& j : read_jsonl(file(files::kWorkbooks), files::kWorkbooks)) {
            b.index_.emplace(j.at("id").get<std::string>(), b.workbooks_.size());
            b.workbooks_.push_back(WorkbookMeta::from_json(j));
        }
        for (const auto& [name, fj] : b.manifest_.at("facets").items()) {
            const auto facet = similarity::facet_from_string(name);
            if (!facet) corrupt("unknown facet " + name);
            auto fc = similarity::default_facet(*facet);
            fc.low = fj.at("low").get<double>();
            fc.high = fj.at("high").get<double>();
            fc.high_inclusive = fj.at("high_inclusive").get<bool>();
            b.facets_[*facet] = fc;
        }

        b.stopwords_ = text::StopWordList(files::split_lines(file(files::kStopwords)), (dir / files::kStopwords).string());

        const auto tfidf_path = dir / files::kTfIdf;
        b.tfidf_ = io::load_tfidf(tfidf_path);

        for (const auto& j : read_jsonl(file(files::kDocuments), files::kDocuments)) {
            if (j.at("profile").get<std::string>() != "all_text") continue;
            auto counts = j.at("counts").get<std::map<std::string, int>>();
            b.documents_.push_back(text::Document::from_counts(j.at("workbook_id").get<std::string>(), std::move(counts)));
        }
        for (const auto& d : b.documents_) b.vectors_.emplace(d.workbook_id, models::tfidf_vector(b.tfidf_, d));

        io::BinaryReader nr(file(files::kNeighbors), io::ArtifactKind::NeighborLists);
        const auto n_lists = nr.u64();
        for (std::uint64_t l = 0; l < n_lists; ++l) {
            auto id = nr.str();
            const auto facet_raw = nr.u32();
            if (facet_raw > 2) corrupt("bad facet in neighbor list");
            const auto facet = static_cast<similarity::Facet>(facet_raw);
            const auto n = nr.u64();
            std::vector<similarity::Neighbor> list;
            for (std::uint64_t i = 0; i < n; ++i) {
                auto nid = nr.str();
                const double score = nr.f64();
                if (!b.index_.count(nid)) corrupt("neighbor id " + nid + " not in metadata");
                list.push_back({std::move(nid), score});
            }
            b.neighbors_[{std::move(id), facet}] = std::move(list);
        }
        nr.finish();

        for (const auto& j : read_jsonl(file(files::kGroups), files::kGroups)) {
            similarity::DuplicateGroup g;
            g.group_id = j.at("group_id").get<std::string>();
            g.member_ids = j.at("member_ids").get<std::vector<std::string>>();
            g.representative_id = j.at("representative_id").get<std::string>();
            for (const auto& m : g.member_ids) b.group_index_[m] = b.groups_.size();
            b.groups_.push_back(std::move(g));
        }

        const auto tags = json::parse(file(files::kTags));
        for (const auto& t : tags.at("tags")) {
            b.tags_.push_back({t.at("tag").get<std::string>(), t.at("weight").get<double>(),
                               t.at("workbook_ids").get<std::vector<std::string>>()});
        }

        io::BinaryReader ir(file(files::kInverted), io::ArtifactKind::InvertedIndex);
        const auto n_tokens = ir.u64();
        for (std::uint64_t t = 0; t < n_tokens; ++t) {
            auto token = ir.str();
            b.inverted_[std::move(token)] = ir.strs();
        }
        ir.finish();
    } catch (const json::exception& e) {
        corrupt(std::string("bundle: ") + e.what());
    }
    return b;
}

const WorkbookMeta* Bundle::find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &workbooks_[it->second];
}

const WorkbookMeta& Bundle::at(const std::string& id) const {
    const auto* m = find(id);
    if (!m) throw Error(ErrorCode::UnknownWorkbook, "no workbook with id '" + id + "'");
    return *m;
}

const std::vector<similarity::Neighbor>& Bundle::neighbors(const std::string& id, similarity::Facet facet) const {
    static const std::vector<similarity::Neighbor> kEmpty;
    const auto it = neighbors_.find({id, facet});
    return it == neighbors_.end() ? kEmpty : it->second;
}

const similarity::DuplicateGroup* Bundle::group_of(const std::string& id) const {
    const auto it = group_index_.find(id);
    return it == group_index_.end() ? nullptr : &groups_[it->second];
}

std::vector<std::string> Bundle::workbooks_with_token(const std::string& token) const {
    std::string key = token;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto it = inverted_.find(text::normalize_token(key));
    return it == inverted_.end() ? std::vector<std::string>{} : it->second;
}

const models::SparseVector* Bundle::tfidf_vector(const std::string& id) const {
    const auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
}

std::string trimmed(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<SearchHit> search(const Bundle& bundle, const std::string& query, std::size_t limit) {
    const auto q = trimmed(query);
    if (q.empty() || limit == 0) return {};
    const auto qdoc = text::document_from_text("query", q, bundle.stopwords());
    const auto qv = models::tfidf_vector(bundle.tfidf(), qdoc);
    const auto qlower = lower(q);

    std::vector<SearchHit> hits;
    for (const auto& m : bundle.workbooks()) {
        SearchHit h;
        h.id = m.id;
        if (const auto* v = bundle.tfidf_vector(m.id); v && !qv.empty()) h.score = qv.dot(*v);
        h.author_match = !m.author.empty() && lower(m.author).starts_with(qlower);
        if (h.author_match || h.score > 0.0) hits.push_back(std::move(h));
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.author_match != b.author_match) return a.author_match;
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > limit) hits.resize(limit);
    return hits;
}

RecommendationPage recommend(const Bundle& bundle, const std::string& id, similarity::Facet facet, std::size_t limit,
                             std::size_t offset) {
    bundle.at(id);
    const auto& list = bundle.neighbors(id, facet);
    RecommendationPage page;
    page.total = list.size();
    for (std::size_t i = offset; i < list.size() && i < offset + limit; ++i) {
        page.items.push_back({&bundle.at(list[i].id), list[i].score});
    }
    return page;
}

}  // namespace vizrec::service
