#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vizrec/lda.hpp"
#include "vizrec/lsi.hpp"
#include "vizrec/tfidf.hpp"

namespace vizrec::io {

// Container layout: 8-byte magic "VZRCBIN\0", u32 format version, u32 artifact
// kind, then the payload. All integers little-endian, reals IEEE-754 binary64
// little-endian, strings as u64 length + bytes.
inline constexpr std::string_view kMagic{"VZRCBIN\0", 8};
inline constexpr std::uint32_t kFormatVersion = 1;

enum class ArtifactKind : std::uint32_t {
    TfIdf = 1,
    Lsi = 2,
    Lda = 3,
    NeighborLists = 4,
    InvertedIndex = 5,
    TopicTable = 6,
};

class BinaryWriter {
public:
    explicit BinaryWriter(ArtifactKind kind);

    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v);
    void str(std::string_view s);
    void f64s(const std::vector<double>& v);
    void strs(const std::vector<std::string>& v);

    const std::string& bytes() const { return buf_; }
    void save(const std::filesystem::path& path) const;

private:
    std::string buf_;
};

class BinaryReader {
public:
    /// Validates magic, version and kind; throws CorruptArtifact otherwise.
    BinaryReader(std::string bytes, ArtifactKind expected);
    static BinaryReader open(const std::filesystem::path& path, ArtifactKind expected);

    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64();
    std::string str();
    std::vector<double> f64s();
    std::vector<std::string> strs();

    bool at_end() const { return pos_ == buf_.size(); }
    /// Throws CorruptArtifact if unread bytes remain.
    void finish() const;

private:
    const char* take(std::size_t n);
    std::string buf_;
    std::size_t pos_ = 0;
};

std::string encode_tfidf(const models::TfIdfModel& model);
std::string encode_lda(const models::LdaModel& model);
std::string encode_lsi(const models::LsiModel& model);

void save_tfidf(const models::TfIdfModel& model, const std::filesystem::path& path);
models::TfIdfModel load_tfidf(const std::filesystem::path& path);

void save_lda(const models::LdaModel& model, const std::filesystem::path& path);
models::LdaModel load_lda(const std::filesystem::path& path);

void save_lsi(const models::LsiModel& model, const std::filesystem::path& path);
models::LsiModel load_lsi(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace vizrec::io
