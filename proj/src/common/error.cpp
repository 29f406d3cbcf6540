#include "crossling/common/error.hpp"

namespace crossling {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MissingField: return "MissingField";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::InsufficientAnswers: return "InsufficientAnswers";
        case ErrorKind::ProviderError: return "ProviderError";
        case ErrorKind::NoJudgments: return "NoJudgments";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::InvalidRequest: return "InvalidRequest";
        case ErrorKind::UnboundPlaceholder: return "UnboundPlaceholder";
        case ErrorKind::MixedDatasets: return "MixedDatasets";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::EmptyTokens: return "EmptyTokens";
        case ErrorKind::TooFewAnswers: return "TooFewAnswers";
        case ErrorKind::NoSentences: return "NoSentences";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DegenerateVariance: return "DegenerateVariance";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::ZeroBaseline: return "ZeroBaseline";
        case ErrorKind::IncompleteRun: return "IncompleteRun";
        case ErrorKind::IncompleteBatch: return "IncompleteBatch";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::Unauthorized: return "Unauthorized";
        case ErrorKind::ValidationFailed: return "ValidationFailed";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace crossling
