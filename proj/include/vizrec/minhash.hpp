#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vizrec/text.hpp"

namespace vizrec::similarity {

inline constexpr std::size_t kMinHashSize = 128;
inline constexpr std::size_t kMinHashBands = 16;
inline constexpr std::size_t kMinHashRows = 8;
static_assert(kMinHashBands * kMinHashRows == kMinHashSize);

struct MinHashSignature {
    std::string workbook_id;
    std::array<std::uint64_t, kMinHashSize> h{};
    std::uint64_t seed = 0;

    bool operator==(const MinHashSignature&) const = default;
};

/// Min over the document's token set (counts ignored) of 128 seeded 64-bit
/// hashes. Throws EmptyDocument.
MinHashSignature minhash_signature(const text::Document& doc, std::uint64_t seed);

/// Fraction of agreeing slots.
double estimated_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Exact Jaccard of two documents' token sets.
double exact_jaccard(const text::Document& a, const text::Document& b);

/// Banded LSH (16 bands x 8 rows). Pairs colliding in at least one band are
/// kept if their estimated Jaccard is at least threshold - slack. Pairs are
/// index pairs (i < j) into `signatures`.
std::set<std::pair<std::size_t, std::size_t>> minhash_candidates(std::span<const MinHashSignature> signatures,
                                                                 double threshold, double slack = 0.15);

}  // namespace vizrec::similarity
