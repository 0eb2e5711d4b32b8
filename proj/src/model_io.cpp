#include "vizrec/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vizrec/error.hpp"

namespace vizrec::io {

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

BinaryWriter::BinaryWriter(ArtifactKind kind) {
    buf_.append(kMagic);
    u32(kFormatVersion);
    u32(static_cast<std::uint32_t>(kind));
}

void BinaryWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_ += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void BinaryWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_ += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
}

void BinaryWriter::f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void BinaryWriter::strs(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
}

void BinaryWriter::save(const std::filesystem::path& path) const { write_file_bytes(path, buf_); }

BinaryReader::BinaryReader(std::string bytes, ArtifactKind expected) : buf_(std::move(bytes)) {
    if (buf_.size() < 16 || std::string_view(buf_).substr(0, 8) != kMagic) {
        throw Error(ErrorCode::CorruptArtifact, "bad magic header");
    }
    pos_ = 8;
    if (const auto version = u32(); version != kFormatVersion) {
        throw Error(ErrorCode::CorruptArtifact, "unsupported format version " + std::to_string(version));
    }
    if (const auto kind = u32(); kind != static_cast<std::uint32_t>(expected)) {
        throw Error(ErrorCode::CorruptArtifact, "artifact kind " + std::to_string(kind) + ", expected " +
                                                    std::to_string(static_cast<std::uint32_t>(expected)));
    }
}

BinaryReader BinaryReader::open(const std::filesystem::path& path, ArtifactKind expected) {
    return BinaryReader(read_file_bytes(path), expected);
}

const char* BinaryReader::take(std::size_t n) {
    if (n > buf_.size() - pos_) throw Error(ErrorCode::CorruptArtifact, "truncated artifact");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
}

std::uint32_t BinaryReader::u32() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(4));
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(8));
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
    const auto n = u64();
    if (n > buf_.size() - pos_) throw Error(ErrorCode::CorruptArtifact, "truncated string");
    return std::string(take(static_cast<std::size_t>(n)), static_cast<std::size_t>(n));
}

std::vector<double> BinaryReader::f64s() {
    const auto n = u64();
    if (n > (buf_.size() - pos_) / 8) throw Error(ErrorCode::CorruptArtifact, "truncated array");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = f64();
    return v;
}

std::vector<std::string> BinaryReader::strs() {
    const auto n = u64();
    if (n > (buf_.size() - pos_) / 8) throw Error(ErrorCode::CorruptArtifact, "truncated string list");
    std::vector<std::string> v(static_cast<std::size_t>(n));
    for (auto& s : v) s = str();
    return v;
}

void BinaryReader::finish() const {
    if (!at_end()) throw Error(ErrorCode::CorruptArtifact, "trailing bytes in artifact");
}

namespace {

void write_vocabulary(BinaryWriter& w, const models::Vocabulary& vocab) {
    w.i32(vocab.n_documents);
    w.strs(vocab.tokens);
    w.u64(vocab.document_frequency.size());
    for (int df : vocab.document_frequency) w.i32(df);
}

models::Vocabulary read_vocabulary(BinaryReader& r) {
    models::Vocabulary vocab;
    vocab.n_documents = r.i32();
    vocab.tokens = r.strs();
    const auto n = r.u64();
    if (n != vocab.tokens.size()) throw Error(ErrorCode::CorruptArtifact, "vocabulary size mismatch");
    vocab.document_frequency.resize(static_cast<std::size_t>(n));
    for (auto& df : vocab.document_frequency) df = r.i32();
    vocab.reindex();
    return vocab;
}

}  // namespace

std::string encode_tfidf(const models::TfIdfModel& model) {
    BinaryWriter w(ArtifactKind::TfIdf);
    write_vocabulary(w, model.vocabulary);
    w.f64s(model.idf);
    return w.bytes();
}

models::TfIdfModel load_tfidf(const std::filesystem::path& path) {
    auto r = BinaryReader::open(path, ArtifactKind::TfIdf);
    models::TfIdfModel model;
    model.vocabulary = read_vocabulary(r);
    model.idf = r.f64s();
    r.finish();
    if (model.idf.size() != model.vocabulary.size()) throw Error(ErrorCode::CorruptArtifact, "idf size mismatch");
    return model;
}

std::string encode_lda(const models::LdaModel& model) {
    BinaryWriter w(ArtifactKind::Lda);
    w.i32(model.k);
    w.f64(model.alpha);
    w.f64(model.beta);
    w.u64(model.seed);
    write_vocabulary(w, model.vocabulary);
    w.f64s(model.topic_word);
    return w.bytes();
}

models::LdaModel load_lda(const std::filesystem::path& path) {
    auto r = BinaryReader::open(path, ArtifactKind::Lda);
    models::LdaModel model;
    model.k = r.i32();
    model.alpha = r.f64();
    model.beta = r.f64();
    model.seed = r.u64();
    model.vocabulary = read_vocabulary(r);
    model.topic_word = r.f64s();
    r.finish();
    if (model.topic_word.size() != static_cast<std::size_t>(model.k) * model.vocabulary.size()) {
        throw Error(ErrorCode::CorruptArtifact, "topic-word matrix size mismatch");
    }
    return model;
}

std::string encode_lsi(const models::LsiModel& model) {
    BinaryWriter w(ArtifactKind::Lsi);
    w.i32(model.k);
    w.u64(static_cast<std::uint64_t>(model.projection.cols()));
    w.f64s(model.singular_values);
    for (Eigen::Index r = 0; r < model.projection.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.projection.cols(); ++c) w.f64(model.projection(r, c));
    }
    return w.bytes();
}

models::LsiModel load_lsi(const std::filesystem::path& path) {
    auto r = BinaryReader::open(path, ArtifactKind::Lsi);
    models::LsiModel model;
    model.k = r.i32();
    const auto cols = static_cast<Eigen::Index>(r.u64());
    model.singular_values = r.f64s();
    if (model.k < 0 || model.singular_values.size() != static_cast<std::size_t>(model.k)) {
        throw Error(ErrorCode::CorruptArtifact, "singular value count mismatch");
    }
    model.projection.resize(model.k, cols);
    for (Eigen::Index i = 0; i < model.projection.rows(); ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) model.projection(i, c) = r.f64();
    }
    r.finish();
    return model;
}

void save_tfidf(const models::TfIdfModel& model, const std::filesystem::path& path) {
    write_file_bytes(path, encode_tfidf(model));
}

void save_lda(const models::LdaModel& model, const std::filesystem::path& path) {
    write_file_bytes(path, encode_lda(model));
}

void save_lsi(const models::LsiModel& model, const std::filesystem::path& path) {
    write_file_bytes(path, encode_lsi(model));
}

}  // namespace vizrec::io
