#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"

#include <cmath>

namespace vizrec {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::UnsupportedSchema: return "UnsupportedSchema";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownSheet: return "UnknownSheet";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoKnownTokens: return "NoKnownTokens";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::ScoringFailure: return "ScoringFailure";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::UnknownWorkbook: return "UnknownWorkbook";
    case ErrorCode::UnknownFacet: return "UnknownFacet";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CorruptArtifact: return "CorruptArtifact";
    }
    return "Unknown";
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

// Marsaglia polar method.
double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

}  // namespace vizrec
