/// @file translation.hpp
/// @brief Dataset translation through a pluggable provider, and the
/// fluency/meaning quality report for human judgments of translations.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crossling/corpus/dataset.hpp"

namespace crossling::corpus {

class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;
    /// Throws on failure; translate_dataset records the failure per row.
    virtual std::string translate(const std::string& text, const std::string& source_lang,
                                  const std::string& target_lang) = 0;
};

/// Returns the input unchanged.
class EchoTranslationProvider final : public TranslationProvider {
public:
    std::string translate(const std::string& text, const std::string&, const std::string&) override { return text; }
};

/// POST {base_url}/translate with {"text","source","target"}; expects
/// {"text": "..."} back. The API key is read from @p api_key_env and sent as
/// a bearer token.
class HttpTranslationProvider final : public TranslationProvider {
public:
    HttpTranslationProvider(std::string base_url, std::string api_key_env);
    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;

private:
    std::string base_url_;
    std::string api_key_env_;
};

struct TranslationFailure {
    std::size_t row = 0;  ///< 0-based input row
    std::string id;
    std::string message;
};

struct TranslationResult {
    Dataset dataset;  ///< successful rows only, in input order
    std::vector<TranslationFailure> failures;
};

/// Translates question and answer of every row. Rows are fanned out across
/// @p workers threads and reassembled in input order. Throws InvalidArgument
/// if a row is already in @p target_language.
TranslationResult translate_dataset(const Dataset& dataset, TranslationProvider& provider,
                                    const std::string& target_language, std::size_t workers = 1);

struct TranslationJudgment {
    std::string example_id;
    std::string annotator_id;
    std::string tool;      ///< translation system, e.g. "chatgpt", "google"
    std::string language;  ///< target language
    int fluency = 0;       ///< 1..5
    int meaning = 0;       ///< 1..5
};

struct ToolLanguageQuality {
    double mean_fluency = 0.0;
    double mean_meaning = 0.0;
    std::size_t judgments = 0;
};

struct TranslationQualityReport {
    /// keyed by (tool, language)
    std::map<std::pair<std::string, std::string>, ToolLanguageQuality> cells;
    /// average pairwise Cohen's kappa per language
    std::map<std::string, double> kappa_by_language;
    /// average pairwise Cohen's kappa over everything; empty when no two
    /// annotators share an item
    std::optional<double> kappa;
};

/// Means use the raw Likert scores. Kappa: for each annotator pair, the items
/// both rated (example x tool x language x dimension) are compared on the raw
/// 5-point labels; the report averages kappa over pairs with >= 1 shared item.
/// Throws NoJudgments on empty input and InvalidArgument on scores outside 1..5.
TranslationQualityReport score_translation_quality(const std::vector<TranslationJudgment>& judgments);

}  // namespace crossling::corpus
