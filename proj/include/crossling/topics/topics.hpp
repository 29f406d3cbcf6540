/// @file topics.hpp
/// @brief LDA (collapsed Gibbs) and HDP (truncated stick-breaking Gibbs)
/// topic models over tokenized answers, plus inference with frozen topics.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace crossling::topics {

using Document = std::vector<std::string>;
using Corpus = std::vector<Document>;
using TopicDistribution = std::vector<double>;

/// Tokenized, case-folded document.
Document prepare_document(std::string_view text);

struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::uint32_t> index;

    static Vocabulary build(const Corpus& corpus);
    [[nodiscard]] std::size_t size() const noexcept { return words.size(); }
};

struct LdaOptions {
    std::size_t n_topics = 20;
    double alpha = 0.0;  ///< <= 0 means 50 / n_topics
    double beta = 0.01;
    std::size_t iterations = 1000;
    std::size_t log_every = 50;
    std::uint64_t seed = 1;
};

struct LdaModel {
    std::size_t n_topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    Vocabulary vocab;
    std::vector<std::uint32_t> topic_word;    ///< n_topics x V counts, row-major
    std::vector<std::uint64_t> topic_totals;  ///< tokens per topic
    std::vector<std::pair<std::size_t, double>> perplexity_trace;  ///< (iteration, perplexity)

    /// (n_kw + beta) / (n_k + V beta) for one topic.
    [[nodiscard]] std::vector<double> topic_word_distribution(std::size_t k) const;
};

/// Collapsed Gibbs sampling; the model is the final sampler state. Throws
/// EmptyCorpus when no document has a token.
LdaModel fit_lda(const Corpus& corpus, const LdaOptions& options);

struct HdpOptions {
    double gamma = 1.0;   ///< top-level concentration
    double alpha0 = 1.0;  ///< document-level concentration
    double eta = 0.5;     ///< topic-word Dirichlet
    std::size_t truncation = 150;
    std::size_t iterations = 300;
    std::uint64_t seed = 1;
};

struct HdpModel {
    double gamma = 0.0;
    double alpha0 = 0.0;
    double eta = 0.0;
    std::size_t truncation = 0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    Vocabulary vocab;
    /// only topics holding at least one token, largest first
    std::vector<std::vector<std::uint32_t>> topic_word;
    std::vector<std::uint64_t> topic_totals;
    std::vector<double> topic_weights;  ///< global stick weights of the realized topics, renormalized
    /// token assignments of the training corpus, as realized-topic indices
    std::vector<std::vector<std::uint32_t>> assignments;

    [[nodiscard]] std::size_t realized_topics() const noexcept { return topic_word.size(); }
    [[nodiscard]] std::vector<double> topic_word_distribution(std::size_t k) const;
};

/// Throws EmptyCorpus, or InvalidArgument for truncation < 2.
HdpModel fit_hdp(const Corpus& corpus, const HdpOptions& options);

/// Topic mixture of @p doc under frozen topics, by fixed-point iteration of
/// theta_k proportional to prior_k + sum_i r_ik. Unseen tokens are ignored;
/// a document with no known token gets the uniform vector.
TopicDistribution infer_topic_distribution(const LdaModel& model, const Document& doc);
TopicDistribution infer_topic_distribution(const HdpModel& model, const Document& doc);

/// Cosine of two distributions. Throws DimensionMismatch.
double topic_similarity(const TopicDistribution& a, const TopicDistribution& b);

nlohmann::json to_json(const LdaModel& m);
LdaModel lda_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HdpModel& m);
HdpModel hdp_from_json(const nlohmann::json& j);

}  // namespace crossling::topics
