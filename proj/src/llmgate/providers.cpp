#include "crossling/llmgate/providers.hpp"

#include "crossling/common/error.hpp"
#include "crossling/common/http.hpp"
#include "crossling/common/text.hpp"

namespace crossling::llm {

using json = nlohmann::json;

OpenAiChatProvider::OpenAiChatProvider(std::string base_url, std::string api_key_env, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env)), timeout_(timeout) {}

ProviderReply OpenAiChatProvider::chat(const CompletionRequest& request) {
    json messages = json::array();
    if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    const json body{{"model", request.model},
                    {"messages", messages},
                    {"temperature", request.temperature},
                    {"max_tokens", request.max_tokens}};

    std::map<std::string, std::string> headers;
    const auto key = http::env_or_empty(api_key_env_);
    if (key.empty()) throw Error(ErrorKind::AuthError, "environment variable " + api_key_env_ + " is not set");
    headers["Authorization"] = "Bearer " + key;

    const auto res = http::post_json(base_url_, "/chat/completions", body.dump(), headers, timeout_);
    const auto parsed = json::parse(res.body, nullptr, false);

    if (res.status == 0) throw Error(ErrorKind::ProviderUnavailable, "connection failed: " + res.error);
    if (res.status == 401 || res.status == 403) {
        throw Error(ErrorKind::AuthError, "HTTP " + std::to_string(res.status));
    }
    if (res.status == 429 || res.status >= 500) {
        throw Error(ErrorKind::ProviderUnavailable, "HTTP " + std::to_string(res.status));
    }
    if (res.status == 400 && !parsed.is_discarded() && parsed.contains("error") && parsed["error"].is_object() &&
        parsed["error"].value("code", "") == "content_filter") {
        return {"", true, "content_filter"};
    }
    if (res.status != 200) {
        throw Error(ErrorKind::ProviderError, "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
    }
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
        throw Error(ErrorKind::ProviderError, "response has no choices");
    }
    const auto& choice = parsed["choices"][0];
    if (choice.value("finish_reason", "") == "content_filter") return {"", true, "content_filter"};
    const auto& content = choice["message"]["content"];
    return {content.is_string() ? content.get<std::string>() : std::string{}, false, ""};
}

MockChatProvider::MockChatProvider(std::vector<Rule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

namespace {

std::vector<MockChatProvider::Rule> parse_rules(const json& fixture) {
    std::vector<MockChatProvider::Rule> rules;
    for (const auto& r : fixture.value("rules", json::array())) {
        MockChatProvider::Rule rule;
        rule.match = r.value("match", "");
        rule.responses = r.value("responses", std::vector<std::string>{});
        rule.filtered = r.value("filtered", false);
        rule.refusal_reason = r.value("refusal_reason", rule.filtered ? "content_filter" : "");
        rule.fail = r.value("fail", "");
        rule.fail_times = r.value("fail_times", std::size_t{0});
        rules.push_back(std::move(rule));
    }
    return rules;
}

json read_fixture(const std::filesystem::path& path) {
    auto parsed = json::parse(read_file(path), nullptr, false);
    if (parsed.is_discarded()) throw Error(ErrorKind::ParseError, "mock fixture " + path.string());
    return parsed;
}

}  // namespace

MockChatProvider MockChatProvider::from_json(const json& fixture) {
    return MockChatProvider(parse_rules(fixture), fixture.value("default", "OK"));
}

MockChatProvider MockChatProvider::from_file(const std::filesystem::path& path) {
    return from_json(read_fixture(path));
}

std::shared_ptr<MockChatProvider> MockChatProvider::shared_from_file(const std::filesystem::path& path) {
    const auto fixture = read_fixture(path);
    return std::make_shared<MockChatProvider>(parse_rules(fixture), fixture.value("default", "OK"));
}

ProviderReply MockChatProvider::chat(const CompletionRequest& request) {
    ++calls_;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const auto& rule = rules_[i];
        if (request.user_prompt.find(rule.match) == std::string::npos) continue;
        if (!rule.fail.empty()) {
            bool fail_now = rule.fail_times == 0;
            if (!fail_now) {
                std::lock_guard lock(mutex_);
                fail_now = failures_by_rule_[i]++ < rule.fail_times;
            }
            if (fail_now) {
                if (rule.fail == "auth") throw Error(ErrorKind::AuthError, "mock: rejected key");
                throw Error(ErrorKind::ProviderUnavailable, "mock: unavailable");
            }
        }
        if (rule.filtered) return {"", true, rule.refusal_reason};
        if (rule.responses.empty()) return {fallback_, false, ""};
        return {rule.responses[request.sample_index % rule.responses.size()], false, ""};
    }
    return {fallback_, false, ""};
}

}  // namespace crossling::llm
