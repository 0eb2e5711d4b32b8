#include "vizrec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "vizrec/error.hpp"

namespace vizrec::similarity {

namespace {

// sqrt(nu2 * nv2) rather than sqrt(nu2) * sqrt(nv2): for u == v the square
// root of the rounded square is exact, so self-similarity is exactly 1.
double cosine_from(double dot, double nu2, double nv2) {
    if (nu2 == 0.0 || nv2 == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
    const double prod = nu2 * nv2;
    const double denom = std::isnormal(prod) ? std::sqrt(prod) : std::sqrt(nu2) * std::sqrt(nv2);
    return std::clamp(dot / denom, -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("cosine of {}-d and {}-d vectors", u.size(), v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return cosine_from(dot, nu, nv);
}

double cosine_similarity(const models::SparseVector& u, const models::SparseVector& v) {
    return cosine_from(u.dot(v), u.dot(u), v.dot(v));
}

double jsd(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("jsd of {}- and {}-topic distributions", p.size(), q.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) sum += p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) sum += q[i] * std::log2(q[i] / m);
    }
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

double jsd(const models::TopicDistribution& p, const models::TopicDistribution& q) {
    return jsd(p.probabilities, q.probabilities);
}

double jsd_similarity(const models::TopicDistribution& p, const models::TopicDistribution& q) {
    return 1.0 - jsd(p, q);
}

std::string_view to_string(Facet facet) noexcept {
    switch (facet) {
    case Facet::Related: return "related";
    case Facet::Versions: return "versions";
    case Facet::SimilarData: return "similar-data";
    }
    return "unknown";
}

std::optional<Facet> facet_from_string(std::string_view name) noexcept {
    for (auto f : kAllFacets) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

FacetConfig default_facet(Facet facet) {
    switch (facet) {
    case Facet::Related: return {Facet::Related, 0.65, 0.90, false, text::FeatureProfile::all_text()};
    case Facet::Versions: return {Facet::Versions, 0.90, 1.0, true, text::FeatureProfile::all_text()};
    case Facet::SimilarData: return {Facet::SimilarData, 0.90, 1.0, true, text::FeatureProfile::columns_only()};
    }
    return {};
}

NeighborList top_k_neighbors(std::string_view source_id, bool source_eligible, std::span<const Candidate> candidates,
                             const FacetConfig& facet, std::size_t k) {
    NeighborList list;
    list.workbook_id = std::string(source_id);
    list.facet = facet.facet;
    if (!source_eligible) return list;
    for (const auto& c : candidates) {
        if (c.id == source_id || !c.eligible || !facet.contains(c.score)) continue;
        list.neighbors.push_back({c.id, c.score});
    }
    std::sort(list.neighbors.begin(), list.neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (list.neighbors.size() > k) list.neighbors.resize(k);
    return list;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<DuplicateGroup> group_near_duplicates(std::span<const ScoredPair> pairs,
                                                  std::span<const GroupMember> members, double threshold) {
    // Node ids in sorted order so component roots are deterministic.
    std::map<std::string, std::string> dates;
    for (const auto& m : members) dates[m.id] = m.modified_date;
    for (const auto& p : pairs) {
        if (p.score >= threshold) {
            dates.try_emplace(p.a);
            dates.try_emplace(p.b);
        }
    }
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& [id, date] : dates) {
        index.emplace(id, ids.size());
        ids.push_back(id);
    }

    UnionFind uf(ids.size());
    for (const auto& p : pairs) {
        if (p.score >= threshold && p.a != p.b) uf.unite(index.at(p.a), index.at(p.b));
    }

    std::map<std::size_t, std::vector<std::string>> components;
    for (std::size_t i = 0; i < ids.size(); ++i) components[uf.find(i)].push_back(ids[i]);

    std::vector<DuplicateGroup> groups;
    for (auto& [root, member_ids] : components) {
        if (member_ids.size() < 2) continue;
        DuplicateGroup g;
        g.member_ids = std::move(member_ids);
        g.representative_id = g.member_ids.front();
        for (const auto& id : g.member_ids) {
            if (dates[id] > dates[g.representative_id]) g.representative_id = id;
        }
        groups.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < groups.size(); ++i) groups[i].group_id = fmt::format("group-{:04d}", i + 1);
    return groups;
}

}  // namespace vizrec::similarity
