#pragma once

#include <string>
#include <string_view>
#include <vector>

// File names inside a bundle directory.
namespace vizrec::service::files {

inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kWorkbooks = "workbooks.jsonl";
inline constexpr const char* kDocuments = "documents.jsonl";
inline constexpr const char* kStopwords = "stopwords.txt";
inline constexpr const char* kTfIdf = "tfidf.bin";
inline constexpr const char* kFacetModel = "model_all_text.bin";
inline constexpr const char* kColumnsModel = "model_columns.bin";
inline constexpr const char* kNeighbors = "neighbors.bin";
inline constexpr const char* kGroups = "groups.jsonl";
inline constexpr const char* kTags = "tags.json";
inline constexpr const char* kInverted = "inverted_index.bin";
inline constexpr const char* kBuildReport = "build_report.json";

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    while (!s.empty()) {
        const auto nl = s.find('\n');
        auto line = s.substr(0, nl);
        if (!line.empty()) out.emplace_back(line);
        if (nl == std::string_view::npos) break;
        s.remove_prefix(nl + 1);
    }
    return out;
}

}  // namespace vizrec::service::files
