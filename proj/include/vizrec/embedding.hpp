#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "vizrec/text.hpp"

namespace vizrec::models {

struct WordVectorTable {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;

    std::size_t size() const { return vectors.size(); }
    const std::vector<double>* find(const std::string& token) const;
};

/// Whitespace text format (GloVe style): a token followed by d reals per line.
/// The first line fixes d; later lines of another arity raise
/// DimensionMismatch naming the line. Duplicate tokens: the last line wins.
WordVectorTable load_word_vectors(const std::filesystem::path& path);

/// Count-weighted mean of the vectors of in-table tokens. Throws NoKnownTokens
/// when no token of `doc` is in the table.
std::vector<double> embed_document(const WordVectorTable& table, const text::Document& doc);

}  // namespace vizrec::models
