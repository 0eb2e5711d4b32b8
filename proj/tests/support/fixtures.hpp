#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace vizrec::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(VIZREC_FIXTURE_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json load_fixture_json(const std::string& name) {
    return nlohmann::json::parse(read_text(fixture_path(name)));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
}

}  // namespace vizrec::testing
