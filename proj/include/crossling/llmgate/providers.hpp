/// @file providers.hpp
/// @brief OpenAI-compatible HTTP provider and the fixture-driven mock.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "crossling/llmgate/types.hpp"

namespace crossling::llm {

/// POST {base_url}/chat/completions. Content-filter refusals are detected
/// from finish_reason == "content_filter" and from error.code ==
/// "content_filter" in a 400 body.
class OpenAiChatProvider final : public ChatProvider {
public:
    OpenAiChatProvider(std::string base_url, std::string api_key_env,
                       std::chrono::seconds timeout = std::chrono::seconds(120));
    ProviderReply chat(const CompletionRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_env_;
    std::chrono::seconds timeout_;
};

/// Canned responses for tests and dry runs.
///
/// Fixture JSON:
/// @code
/// {"default": "OK",
///  "rules": [{"match": "aspirin", "responses": ["a", "b"]},
///            {"match": "forbidden", "filtered": true, "refusal_reason": "content_filter"},
///            {"match": "flaky", "fail": "unavailable", "fail_times": 2, "responses": ["ok"]}]}
/// @endcode
/// The first rule whose "match" occurs in the user prompt wins. Responses are
/// picked by sample_index modulo their count. "fail" is "unavailable" or
/// "auth"; with fail_times the rule fails that many calls and then answers.
class MockChatProvider final : public ChatProvider {
public:
    struct Rule {
        std::string match;
        std::vector<std::string> responses;
        bool filtered = false;
        std::string refusal_reason;
        std::string fail;
        std::size_t fail_times = 0;  ///< 0 with fail set means always
    };

    MockChatProvider() = default;
    explicit MockChatProvider(std::vector<Rule> rules, std::string fallback = "OK");
    static MockChatProvider from_json(const nlohmann::json& fixture);
    static MockChatProvider from_file(const std::filesystem::path& path);
    /// Heap-allocated variant; the provider itself is not movable.
    static std::shared_ptr<MockChatProvider> shared_from_file(const std::filesystem::path& path);

    ProviderReply chat(const CompletionRequest& request) override;

    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

private:
    std::vector<Rule> rules_;
    std::string fallback_ = "OK";
    std::atomic<std::size_t> calls_{0};
    std::mutex mutex_;
    std::map<std::size_t, std::size_t> failures_by_rule_;
};

}  // namespace crossling::llm
