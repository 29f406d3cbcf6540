/// @file error.hpp
/// @brief Error type shared by every module of the harness.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crossling {

/// Failure categories. Each operation documents which ones it raises.
enum class ErrorKind {
    // corpus
    MissingField,
    DuplicateId,
    EmptyText,
    InsufficientAnswers,
    ProviderError,
    NoJudgments,
    ParseError,
    IoError,
    // llmgate
    ProviderUnavailable,
    AuthError,
    BudgetExceeded,
    EmptyInput,
    InvalidRequest,
    // prompting
    UnboundPlaceholder,
    // correctness
    MixedDatasets,
    // consistency
    DegenerateInput,
    ZeroVector,
    EmptyTokens,
    TooFewAnswers,
    NoSentences,
    // topics
    EmptyCorpus,
    DimensionMismatch,
    // stats
    DegenerateVariance,
    LengthMismatch,
    NonConvergence,
    InvalidArgument,
    // verifiability
    SingleClass,
    // reporting
    ZeroBaseline,
    IncompleteRun,
    // annotation
    IncompleteBatch,
    NotFound,
    Unauthorized,
    ValidationFailed,
    // cli
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace crossling
