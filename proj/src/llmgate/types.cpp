#include "crossling/llmgate/types.hpp"

#include <fmt/format.h>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::llm {

using json = nlohmann::json;

std::string CompletionRequest::cache_key() const {
    // Temperature goes in as fixed text so 0.1 + 0.2 and 0.3 share a key.
    const json key = json::array({model, system_prompt, user_prompt, fmt::format("{:.4f}", temperature), sample_index});
    return sha256_hex(key.dump());
}

json to_json(const GenerationRecord& r) {
    return json{
        {"key", r.request.cache_key()},
        {"model", r.request.model},
        {"system_prompt", r.request.system_prompt},
        {"user_prompt", r.request.user_prompt},
        {"temperature", r.request.temperature},
        {"sample_index", r.request.sample_index},
        {"max_tokens", r.request.max_tokens},
        {"language", r.request.language},
        {"text", r.text},
        {"filtered", r.filtered},
        {"refusal_reason", r.refusal_reason},
        {"latency_ms", r.latency_ms},
        {"created_at", r.created_at},
    };
}

GenerationRecord record_from_json(const json& j) {
    try {
        GenerationRecord r;
        r.request.model = j.at("model").get<std::string>();
        r.request.system_prompt = j.value("system_prompt", "");
        r.request.user_prompt = j.at("user_prompt").get<std::string>();
        r.request.temperature = j.at("temperature").get<double>();
        r.request.sample_index = j.at("sample_index").get<std::size_t>();
        r.request.max_tokens = j.value("max_tokens", std::size_t{1024});
        r.request.language = j.value("language", "");
        r.text = j.value("text", "");
        r.filtered = j.value("filtered", false);
        r.refusal_reason = j.value("refusal_reason", "");
        r.latency_ms = j.value("latency_ms", 0.0);
        r.created_at = j.value("created_at", "");
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("generation record: ") + e.what());
    }
}

}  // namespace crossling::llm
