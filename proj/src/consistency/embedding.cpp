#include "crossling/consistency/embedding.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crossling/common/error.hpp"
#include "crossling/common/http.hpp"
#include "crossling/common/random.hpp"
#include "crossling/common/text.hpp"
#include "crossling/consistency/segmentation.hpp"

namespace crossling::consistency {

using json = nlohmann::json;

std::vector<float> HashingEmbeddingProvider::token_vector(const std::string& folded_token) const {
    const auto digest = sha256_hex(folded_token);
    Rng rng(std::stoull(digest.substr(0, 16), nullptr, 16));
    std::vector<double> v(dim_);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    std::vector<float> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

TokenEmbedding HashingEmbeddingProvider::embed_tokens(std::string_view text) {
    TokenEmbedding out;
    out.tokens = tokenize(text);
    out.vectors.dim = dim_;
    out.vectors.data.reserve(out.tokens.size() * dim_);
    for (const auto& t : fold_case(out.tokens)) {
        const auto v = token_vector(t);
        out.vectors.data.insert(out.vectors.data.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<float> HashingEmbeddingProvider::embed_sentence(std::string_view text) {
    const auto toks = embed_tokens(text);
    std::vector<double> acc(dim_, 0.0);
    for (std::size_t i = 0; i < toks.vectors.rows(); ++i) {
        const auto row = toks.vectors.row(i);
        for (std::size_t k = 0; k < dim_; ++k) acc[k] += row[k];
    }
    std::vector<float> out(dim_, 0.0f);
    if (toks.vectors.rows() == 0) return out;
    for (std::size_t k = 0; k < dim_; ++k) out[k] = static_cast<float>(acc[k] / static_cast<double>(toks.vectors.rows()));
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::string api_key_env, std::size_t dim,
                                             std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env)), dim_(dim), timeout_(timeout) {}

std::string HttpEmbeddingProvider::post(const std::string& path, std::string_view text) const {
    std::map<std::string, std::string> headers;
    if (auto key = http::env_or_empty(api_key_env_); !key.empty()) headers["Authorization"] = "Bearer " + key;
    const auto res = http::post_json(base_url_, path, json{{"input", text}}.dump(), headers, timeout_);
    if (res.status == 0) throw Error(ErrorKind::ProviderUnavailable, "embedding service: " + res.error);
    if (res.status == 401 || res.status == 403) throw Error(ErrorKind::AuthError, "embedding service rejected key");
    if (res.status != 200) throw Error(ErrorKind::ProviderError, fmt::format("embedding service HTTP {}", res.status));
    return res.body;
}

std::vector<float> HttpEmbeddingProvider::embed_sentence(std::string_view text) {
    const auto j = json::parse(post("/embed", text), nullptr, false);
    if (j.is_discarded() || !j.contains("embedding")) throw Error(ErrorKind::ProviderError, "embedding missing");
    auto v = j["embedding"].get<std::vector<float>>();
    if (v.size() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, fmt::format("expected {} dims, got {}", dim_, v.size()));
    }
    return v;
}

TokenEmbedding HttpEmbeddingProvider::embed_tokens(std::string_view text) {
    const auto j = json::parse(post("/embed_tokens", text), nullptr, false);
    if (j.is_discarded() || !j.contains("tokens") || !j.contains("embeddings")) {
        throw Error(ErrorKind::ProviderError, "token embeddings missing");
    }
    TokenEmbedding out;
    out.tokens = j["tokens"].get<std::vector<std::string>>();
    out.vectors.dim = dim_;
    for (const auto& row : j["embeddings"]) {
        const auto v = row.get<std::vector<float>>();
        if (v.size() != dim_) {
            throw Error(ErrorKind::DimensionMismatch, fmt::format("expected {} dims, got {}", dim_, v.size()));
        }
        out.vectors.data.insert(out.vectors.data.end(), v.begin(), v.end());
    }
    if (out.vectors.rows() != out.tokens.size()) throw Error(ErrorKind::ProviderError, "token/vector count differs");
    return out;
}

}  // namespace crossling::consistency
