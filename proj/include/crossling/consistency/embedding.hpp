/// @file embedding.hpp
/// @brief Sentence and token embeddings behind a provider interface.

#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "crossling/consistency/metrics.hpp"

namespace crossling::consistency {

struct TokenEmbedding {
    std::vector<std::string> tokens;
    TokenMatrix vectors;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed_sentence(std::string_view text) = 0;
    virtual TokenEmbedding embed_tokens(std::string_view text) = 0;
};

/// Deterministic stand-in: each case-folded token maps to a fixed random
/// unit vector seeded by its hash; a sentence is the mean of its tokens
/// (the zero vector for text without tokens).
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashingEmbeddingProvider(std::size_t dim = 64) : dim_(dim) {}
    [[nodiscard]] std::size_t dimension() const override { return dim_; }
    std::vector<float> embed_sentence(std::string_view text) override;
    TokenEmbedding embed_tokens(std::string_view text) override;

    [[nodiscard]] std::vector<float> token_vector(const std::string& folded_token) const;

private:
    std::size_t dim_;
};

/// POST {base_url}/embed {"input": text} -> {"embedding": [...]}
/// POST {base_url}/embed_tokens {"input": text} -> {"tokens": [...], "embeddings": [[...], ...]}
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string base_url, std::string api_key_env, std::size_t dim,
                          std::chrono::seconds timeout = std::chrono::seconds(60));
    [[nodiscard]] std::size_t dimension() const override { return dim_; }
    std::vector<float> embed_sentence(std::string_view text) override;
    TokenEmbedding embed_tokens(std::string_view text) override;

private:
    std::string post(const std::string& path, std::string_view text) const;

    std::string base_url_;
    std::string api_key_env_;
    std::size_t dim_;
    std::chrono::seconds timeout_;
};

}  // namespace crossling::consistency
