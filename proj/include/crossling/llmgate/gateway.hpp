/// @file gateway.hpp
/// @brief Cached, retried, rate-limited access to a ChatProvider.

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crossling/llmgate/types.hpp"

namespace crossling::llm {

/// Append-only JSONL journal with an in-memory index. With an empty path the
/// cache lives in memory only. Later lines win when a key repeats.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path journal);

    std::optional<GenerationRecord> get(const std::string& key) const;
    void put(const GenerationRecord& record);
    [[nodiscard]] std::size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, GenerationRecord> index_;
    std::ofstream out_;
};

struct RetryPolicy {
    std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4),
                                                   std::chrono::seconds(16)};
    double jitter = 0.1;  ///< each wait is scaled by a factor in [1 - jitter, 1 + jitter]
    std::function<void(std::chrono::milliseconds)> sleep;  ///< defaults to std::this_thread::sleep_for

    static RetryPolicy immediate(std::size_t retries = 3);
};

/// Token bucket; a rate of 0 disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute = 0.0, double burst = 1.0);
    void acquire();

private:
    double rate_per_s_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

struct GatewayConfig {
    RetryPolicy retry;
    std::size_t max_calls = 0;  ///< provider-call budget; 0 = unlimited
    double requests_per_minute = 0.0;
    /// Case-insensitive phrases that mark a completion as a refusal.
    std::vector<std::string> refusal_phrases;
};

class Gateway {
public:
    Gateway(std::shared_ptr<ChatProvider> provider, std::shared_ptr<ResponseCache> cache, GatewayConfig config = {});

    /// Cache hit: returned without touching the provider. Miss: the provider
    /// is called with retries on ProviderUnavailable and the result (filtered
    /// or not) is persisted. Safe for concurrent callers.
    GenerationRecord complete(const CompletionRequest& request);

    /// K samples with sample_index 0..K-1, in index order. Throws
    /// InvalidArgument when K < 2.
    std::vector<GenerationRecord> generate_samples(const CompletionRequest& base, std::size_t k,
                                                   std::size_t workers = 1);

    [[nodiscard]] std::size_t provider_calls() const;

private:
    bool looks_refused(const std::string& text) const;

    std::shared_ptr<ChatProvider> provider_;
    std::shared_ptr<ResponseCache> cache_;
    GatewayConfig config_;
    RateLimiter limiter_;
    mutable std::mutex budget_mutex_;
    std::size_t calls_ = 0;
};

struct FilterRateRow {
    std::string model;
    std::string language;
    double temperature = 0.0;
    std::size_t total = 0;
    std::size_t filtered = 0;
    double percent = 0.0;  ///< rounded to 0.1
};

/// Share of filtered records per model x language x temperature, sorted by
/// that key. Throws EmptyInput on an empty record set.
std::vector<FilterRateRow> filtering_rate(const std::vector<GenerationRecord>& records);

}  // namespace crossling::llm
