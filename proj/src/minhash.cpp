#include "vizrec/minhash.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"

namespace vizrec::similarity {

MinHashSignature minhash_signature(const text::Document& doc, std::uint64_t seed) {
    if (doc.counts.empty()) {
        throw Error(ErrorCode::EmptyDocument, "minhash of empty document " + doc.workbook_id);
    }
    MinHashSignature sig;
    sig.workbook_id = doc.workbook_id;
    sig.seed = seed;
    std::array<std::uint64_t, kMinHashSize> salts;
    for (std::size_t i = 0; i < kMinHashSize; ++i) salts[i] = splitmix64(seed ^ splitmix64(i + 1));
    sig.h.fill(std::numeric_limits<std::uint64_t>::max());
    for (const auto& [token, count] : doc.counts) {
        const std::uint64_t base = fnv1a64(token);
        for (std::size_t i = 0; i < kMinHashSize; ++i) {
            sig.h[i] = std::min(sig.h[i], splitmix64(base ^ salts[i]));
        }
    }
    return sig;
}

double estimated_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < kMinHashSize; ++i) same += a.h[i] == b.h[i];
    return static_cast<double>(same) / kMinHashSize;
}

double exact_jaccard(const text::Document& a, const text::Document& b) {
    std::size_t inter = 0;
    auto ia = a.counts.begin(), ib = b.counts.begin();
    while (ia != a.counts.end() && ib != b.counts.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.counts.size() + b.counts.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::set<std::pair<std::size_t, std::size_t>> minhash_candidates(std::span<const MinHashSignature> signatures,
                                                                 double threshold, double slack) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t band = 0; band < kMinHashBands; ++band) {
        std::map<std::uint64_t, std::vector<std::size_t>> buckets;
        for (std::size_t s = 0; s < signatures.size(); ++s) {
            std::uint64_t key = splitmix64(band);
            for (std::size_t r = 0; r < kMinHashRows; ++r) {
                key = splitmix64(key ^ signatures[s].h[band * kMinHashRows + r]);
            }
            buckets[key].push_back(s);
        }
        for (const auto& [key, members] : buckets) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    if (estimated_jaccard(signatures[members[i]], signatures[members[j]]) >= threshold - slack) {
                        out.emplace(members[i], members[j]);
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace vizrec::similarity
