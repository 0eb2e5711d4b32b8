#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vizrec/lda.hpp"
#include "vizrec/text.hpp"

namespace vizrec::similarity {

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws DimensionMismatch and
/// ZeroVector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Sparse variant over (index, value) rows; same contract.
double cosine_similarity(const models::SparseVector& u, const models::SparseVector& v);

/// Base-2 Jensen-Shannon divergence in [0, 1] with 0 log 0 := 0.
double jsd(std::span<const double> p, std::span<const double> q);
double jsd(const models::TopicDistribution& p, const models::TopicDistribution& q);

/// 1 - jsd(p, q).
double jsd_similarity(const models::TopicDistribution& p, const models::TopicDistribution& q);

enum class Facet { Related, Versions, SimilarData };

inline constexpr Facet kAllFacets[] = {Facet::Related, Facet::Versions, Facet::SimilarData};

/// "related", "versions", "similar-data".
std::string_view to_string(Facet facet) noexcept;
std::optional<Facet> facet_from_string(std::string_view name) noexcept;

struct FacetConfig {
    Facet facet = Facet::Related;
    double low = 0.0;
    double high = 1.0;
    bool high_inclusive = false;  // [low, high] instead of [low, high)
    text::FeatureProfile profile;

    bool contains(double score) const {
        return score >= low && (high_inclusive ? score <= high : score < high);
    }
};

/// RELATED [0.65, 0.90) and VERSIONS [0.90, 1.0] on all text; SIMILAR_DATA
/// [0.90, 1.0] on column names.
FacetConfig default_facet(Facet facet);

struct Neighbor {
    std::string id;
    double score = 0.0;

    bool operator==(const Neighbor&) const = default;
};

struct NeighborList {
    std::string workbook_id;
    Facet facet = Facet::Related;
    std::vector<Neighbor> neighbors;  // descending score, id ascending on ties
};

struct Candidate {
    std::string id;
    double score = 0.0;
    bool eligible = true;
};

/// Keeps candidates inside the facet band, drops the source itself and
/// ineligible targets, sorts, truncates to k. An ineligible source gets an
/// empty list.
NeighborList top_k_neighbors(std::string_view source_id, bool source_eligible, std::span<const Candidate> candidates,
                             const FacetConfig& facet, std::size_t k);

struct ScoredPair {
    std::string a;
    std::string b;
    double score = 0.0;
};

struct GroupMember {
    std::string id;
    std::string modified_date;  // ISO-8601; lexicographic order is chronological
};

struct DuplicateGroup {
    std::string group_id;
    std::vector<std::string> member_ids;  // ascending
    std::string representative_id;

    bool operator==(const DuplicateGroup&) const = default;
};

/// Connected components (union-find) over pairs scoring >= threshold.
/// Singletons are omitted. The representative is the member with the latest
/// modified date, smallest id on ties. Groups are ordered by smallest member
/// id and numbered "group-0001", "group-0002", ...
std::vector<DuplicateGroup> group_near_duplicates(std::span<const ScoredPair> pairs,
                                                  std::span<const GroupMember> members, double threshold = 0.90);

}  // namespace vizrec::similarity
