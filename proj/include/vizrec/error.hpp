#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vizrec {

enum class ErrorCode {
    MalformedXml,
    MalformedJson,
    MalformedCsv,
    UnsupportedSchema,
    IoError,
    UnknownSheet,
    EmptyCorpus,
    RankTooLarge,
    InvalidK,
    EmptyDocument,
    DimensionMismatch,
    NoKnownTokens,
    ZeroVector,
    InsufficientCorpus,
    ScoringFailure,
    DegenerateInput,
    UnknownWorkbook,
    UnknownFacet,
    BindFailure,
    InvalidConfig,
    InvalidArgument,
    CorruptArtifact,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure surfaces as this exception; `code()` names the
/// failure class so callers (CLI exit codes, HTTP status mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vizrec
