#include "vizrec/embedding.hpp"

#include <cstdlib>
#include <fstream>
#include <string_view>

#include "vizrec/error.hpp"

namespace vizrec::models {

const std::vector<double>* WordVectorTable::find(const std::string& token) const {
    if (auto it = vectors.find(token); it != vectors.end()) return &it->second;
    return nullptr;
}

namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

}  // namespace

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read word vectors from " + path.string());
    WordVectorTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        const std::size_t arity = fields.size() - 1;
        if (table.dim == 0) {
            if (arity == 0) {
                throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + " has no vector components");
            }
            table.dim = arity;
        } else if (arity != table.dim) {
            throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + " has " +
                                                          std::to_string(arity) + " components, expected " +
                                                          std::to_string(table.dim));
        }
        std::vector<double> v(arity);
        for (std::size_t i = 0; i < arity; ++i) {
            const std::string field(fields[i + 1]);
            char* end = nullptr;
            v[i] = std::strtod(field.c_str(), &end);
            if (end != field.c_str() + field.size()) {
                throw Error(ErrorCode::DimensionMismatch,
                            "line " + std::to_string(line_no) + " has a non-numeric component '" + field + "'");
            }
        }
        table.vectors.insert_or_assign(std::string(fields[0]), std::move(v));
    }
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    return table;
}

std::vector<double> embed_document(const WordVectorTable& table, const text::Document& doc) {
    std::vector<double> sum(table.dim, 0.0);
    long weight = 0;
    for (const auto& [token, count] : doc.counts) {
        const auto* v = table.find(token);
        if (!v) continue;
        for (std::size_t i = 0; i < table.dim; ++i) sum[i] += count * (*v)[i];
        weight += count;
    }
    if (weight == 0) {
        throw Error(ErrorCode::NoKnownTokens, "no token of " + doc.workbook_id + " has a word vector");
    }
    for (auto& x : sum) x /= static_cast<double>(weight);
    return sum;
}

}  // namespace vizrec::models
