/// @file verifiability.hpp
/// @brief Yes/no claim checking of (question, answer) instances and the
/// binary classification metrics over the verdicts.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossling/corpus/instances.hpp"
#include "crossling/llmgate/gateway.hpp"
#include "crossling/prompting/parsers.hpp"

namespace crossling::verifiability {

struct VerifiabilityOutcome {
    std::string instance_id;
    std::string question_id;
    std::string language;
    double temperature = 0.0;
    std::size_t repeat = 0;
    bool predicted = false;
    bool truth = false;
    bool indeterminate = false;
    std::string note;
    std::string cache_key;

    bool operator==(const VerifiabilityOutcome&) const = default;
};

struct JudgeOptions {
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    std::string system_prompt;
    std::size_t max_tokens = 1024;
    const prompting::Lexicon* lexicon = nullptr;  ///< null means the built-in one
};

/// One judge call. Filtered replies, unparseable verdicts and provider
/// errors all give an indeterminate, negative prediction. AuthError and
/// BudgetExceeded propagate.
VerifiabilityOutcome judge(const corpus::VerifiabilityInstance& instance, llm::Gateway& gateway,
                           const JudgeOptions& options, std::size_t repeat = 0);

struct ClassificationReport {
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;  ///< harmonic mean of the two macro averages
    double accuracy = 0.0;
    std::optional<double> auc;  ///< absent when only one truth class occurs
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Throws EmptyInput. A class that is never predicted has precision 0.
ClassificationReport classification_metrics(const std::vector<VerifiabilityOutcome>& outcomes);

/// Mann-Whitney AUC from average ranks, ties counting one half. Throws
/// SingleClass or LengthMismatch.
double rank_auc(const std::vector<double>& scores, const std::vector<bool>& truth);
/// Same quantity by enumerating every (positive, negative) pair.
double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& truth);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  ///< population sd over the temperatures
};
std::string format_mean_sd(const MeanSd& m, int decimals = 4);

struct TemperatureReport {
    double temperature = 0.0;
    ClassificationReport report;
    std::vector<VerifiabilityOutcome> outcomes;
};

struct VerifiabilityRun {
    std::string language;
    std::vector<TemperatureReport> per_temperature;
    /// metric name -> mean and sd across temperatures; auc only when every
    /// temperature has one
    std::map<std::string, MeanSd> summary;
};

struct VerifiabilityOptions {
    JudgeOptions judge;
    std::string language;
    std::vector<double> temperatures = llm::default_temperature_grid();
    std::size_t repeats = 1;  ///< judge calls per instance per temperature, each scored separately
    std::size_t workers = 1;
};

/// Judges every instance at every temperature (the judge call itself runs at
/// that temperature). Throws InvalidArgument for an empty grid, a
/// temperature outside [0, 1], or an instance in another language.
VerifiabilityRun evaluate_verifiability(const std::vector<corpus::VerifiabilityInstance>& instances,
                                        llm::Gateway& gateway, const VerifiabilityOptions& options);

MeanSd mean_sd(const std::vector<double>& values);
const std::vector<std::string>& report_metric_names();
std::optional<double> report_metric(const ClassificationReport& r, const std::string& name);

nlohmann::json to_json(const ClassificationReport& r);
nlohmann::json to_json(const VerifiabilityOutcome& o);
VerifiabilityOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VerifiabilityRun& run);

/// One line per outcome, temperature-major.
std::string outcomes_jsonl(const VerifiabilityRun& run);

}  // namespace crossling::verifiability
