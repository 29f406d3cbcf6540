/// @file types.hpp
/// @brief Completion requests, generation records and the provider contract.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace crossling::llm {

/// Number of answers sampled per question for the consistency runs.
inline constexpr std::size_t kDefaultSamples = 10;

/// Temperatures swept by default.
inline const std::vector<double>& default_temperature_grid() {
    static const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    return grid;
}

struct CompletionRequest {
    std::string model;
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    std::size_t sample_index = 0;
    std::size_t max_tokens = 1024;
    /// Bookkeeping only; not part of the cache key (the prompt already
    /// differs per language).
    std::string language;

    /// SHA-256 over (model, system, user, temperature, sample_index).
    [[nodiscard]] std::string cache_key() const;
};

struct GenerationRecord {
    CompletionRequest request;
    std::string text;
    bool filtered = false;
    std::string refusal_reason;
    double latency_ms = 0.0;
    std::string created_at;  ///< ISO-8601 UTC
    /// Set on the returned copy when served from the cache; never persisted.
    bool from_cache = false;
};

nlohmann::json to_json(const GenerationRecord& r);
GenerationRecord record_from_json(const nlohmann::json& j);

/// What a provider hands back for one call.
struct ProviderReply {
    std::string text;
    bool refused = false;  ///< provider-reported content filter
    std::string refusal_reason;
};

/// One chat-completion backend. Implementations throw crossling::Error with
/// ProviderUnavailable for transient failures (retried), AuthError for
/// rejected credentials and ProviderError for anything else.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ProviderReply chat(const CompletionRequest& request) = 0;
};

}  // namespace crossling::llm
