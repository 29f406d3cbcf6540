/// @file evaluate.hpp
/// @brief Consistency run: K samples per question and temperature, then
/// surface, semantic, topic and language agreement among them.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossling/consistency/embedding.hpp"
#include "crossling/consistency/language_id.hpp"
#include "crossling/corpus/dataset.hpp"
#include "crossling/corpus/translation.hpp"
#include "crossling/llmgate/gateway.hpp"
#include "crossling/topics/topics.hpp"

namespace crossling::consistency {

struct AnswerSet {
    std::string question_id;
    std::string language;
    double temperature = 0.0;
    std::vector<std::string> answers;  ///< non-empty, unfiltered samples
    std::size_t filtered = 0;          ///< samples dropped as filtered or empty
};

struct ConsistencyScores {
    std::string question_id;
    std::string language;
    double temperature = 0.0;
    std::size_t k_effective = 0;
    std::size_t filtered = 0;
    double sim_1gram = 0.0;
    double sim_2gram = 0.0;
    double length_mean = 0.0;
    double bertscore_f = 0.0;
    double sim_sent = 0.0;      ///< clamped to [0, 1]
    double sim_sent_raw = 0.0;  ///< mean cosine before clamping
    double sim_lda_20 = 0.0;
    double sim_lda_100 = 0.0;
    double sim_hdp = 0.0;
    double lang_cons = 0.0;

    bool operator==(const ConsistencyScores&) const = default;
};

/// Metric names in export order.
const std::vector<std::string>& metric_names();
/// Value of one named metric. Throws InvalidArgument for an unknown name.
double metric_value(const ConsistencyScores& s, const std::string& metric);

struct TopicOptions {
    topics::LdaOptions lda20{.n_topics = 20};
    topics::LdaOptions lda100{.n_topics = 100};
    topics::HdpOptions hdp{};
    bool remove_stopwords = false;
};

/// Corpus-level topic models for one language, frozen once fitted.
struct TopicModels {
    topics::LdaModel lda20;
    topics::LdaModel lda100;
    topics::HdpModel hdp;

    /// The three models fit concurrently, each single-threaded.
    static TopicModels fit(const std::vector<std::string>& answers, const TopicOptions& options);
};

/// Case-folded tokens; optionally without stopwords.
topics::Document topic_document(std::string_view text, bool remove_stopwords);

struct ConsistencyOptions {
    std::string model = "gpt-3.5-turbo";
    std::string language;
    std::vector<double> temperatures{0.0};
    std::size_t k = llm::kDefaultSamples;
    std::string system_prompt;
    std::size_t max_tokens = 1024;
    std::size_t workers = 1;
    TopicOptions topics;
};

struct ConsistencyProviders {
    llm::Gateway& gateway;
    EmbeddingProvider& embeddings;
    const LanguageIdentifier& identifier;
    /// When set and the run is not English, lengths are measured on the
    /// English back-translation.
    corpus::TranslationProvider* back_translation = nullptr;
};

struct QuestionFailure {
    std::string question_id;
    double temperature = 0.0;
    std::string reason;
};

struct ConsistencyRun {
    std::vector<ConsistencyScores> scores;  ///< temperature-major, then input order
    std::vector<QuestionFailure> failures;
};

/// Samples options.k answers per question and temperature. Generation
/// failures for one question are recorded and the others continue; AuthError
/// and BudgetExceeded abort.
std::vector<AnswerSet> collect_answer_sets(const corpus::Dataset& dataset, const ConsistencyOptions& options,
                                           llm::Gateway& gateway, std::vector<QuestionFailure>& failures);

/// All metrics for one answer set against frozen topic models. Throws
/// TooFewAnswers below two answers, ZeroVector, EmptyTokens or NoSentences.
ConsistencyScores score_answer_set(const AnswerSet& set, const TopicModels& models, EmbeddingProvider& embeddings,
                                   const LanguageIdentifier& identifier, corpus::TranslationProvider* back_translation,
                                   bool remove_stopwords = false);

/// Generates, fits the topic models on every answer of the run, and scores.
/// Throws InvalidArgument when a row is not in options.language or a
/// temperature is outside [0, 1].
ConsistencyRun evaluate_consistency(const corpus::Dataset& dataset, const ConsistencyOptions& options,
                                    const ConsistencyProviders& providers);

/// Mean of every metric per (language, temperature).
struct ConsistencyAggregate {
    std::string language;
    double temperature = 0.0;
    std::size_t questions = 0;
    std::map<std::string, double> means;
};
std::vector<ConsistencyAggregate> aggregate_scores(const std::vector<ConsistencyScores>& scores);

std::string scores_csv(const std::vector<ConsistencyScores>& scores);
std::vector<ConsistencyScores> parse_scores_csv(std::string_view text);
nlohmann::json to_json(const ConsistencyScores& s);
ConsistencyScores scores_from_json(const nlohmann::json& j);
std::string scores_jsonl(const std::vector<ConsistencyScores>& scores);

}  // namespace crossling::consistency
