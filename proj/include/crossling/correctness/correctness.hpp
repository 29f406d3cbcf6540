/// @file correctness.hpp
/// @brief Two-phase correctness protocol, label aggregation and the
/// stratified sample handed to human annotators.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossling/corpus/dataset.hpp"
#include "crossling/llmgate/gateway.hpp"
#include "crossling/prompting/parsers.hpp"

namespace crossling::correctness {

using prompting::CorrectnessLabel;

struct RunOptions {
    std::string model = "gpt-3.5-turbo";
    std::string evaluator_model;  ///< Phase-2 model; empty means same as model
    std::string language;         ///< target language tag
    double temperature = 0.0;
    std::string system_prompt;
    std::size_t max_tokens = 1024;
    std::size_t workers = 1;
};

struct Phase1Answer {
    std::string question_id;
    std::string answer;  ///< empty when filtered or failed
    bool filtered = false;
    std::string error;  ///< provider failure, if any
    std::string cache_key;
};

/// One Phase-1 answer per question, in input order. Provider failures are
/// recorded on the row and the run continues. Throws InvalidArgument if a
/// row is not in options.language.
std::vector<Phase1Answer> run_phase1(const corpus::Dataset& dataset, llm::Gateway& gateway, const RunOptions& options);

struct CorrectnessVerdict {
    std::string question_id;
    corpus::DatasetName dataset = corpus::DatasetName::Custom;
    std::string language;
    std::string question;
    std::string ground_truth;
    std::string llm_answer;
    CorrectnessLabel label = CorrectnessLabel::NoResponse;
    std::string reasoning;
    std::string note;  ///< why a verdict is NoResponse, when known
    std::string phase1_key;
    std::string phase2_key;

    bool operator==(const CorrectnessVerdict&) const = default;
};

/// Grades one answer. Answer 1 is the ground truth and Answer 2 the LLM
/// answer. An empty answer short-circuits to NoResponse without a call;
/// provider errors become NoResponse with a note.
CorrectnessVerdict run_phase2(const corpus::QAPair& question, const Phase1Answer& answer, llm::Gateway& gateway,
                              const RunOptions& options);

/// Phase 1 then Phase 2 for every question, fanned out over options.workers.
std::vector<CorrectnessVerdict> run_correctness(const corpus::Dataset& dataset, llm::Gateway& gateway,
                                                const RunOptions& options);

struct ContingencyTable {
    corpus::DatasetName dataset = corpus::DatasetName::Custom;
    std::map<std::string, std::map<CorrectnessLabel, std::size_t>> counts;

    [[nodiscard]] std::size_t count(const std::string& language, CorrectnessLabel label) const;
    [[nodiscard]] std::size_t total(const std::string& language) const;
    /// en, es, zh, hi first, then any other language alphabetically.
    [[nodiscard]] std::vector<std::string> languages() const;
};

/// Exact counts per language and label, NoResponse included. @p languages
/// seeds all-zero columns. Throws MixedDatasets when verdicts disagree on
/// the dataset.
ContingencyTable aggregate_labels(const std::vector<CorrectnessVerdict>& verdicts,
                                  const std::vector<std::string>& languages = {});

/// Labels as rows, languages as columns.
std::string contingency_csv(const ContingencyTable& table);

struct AnnotationBatch {
    std::string batch_id;  ///< "<language>-<n>", n from 1
    std::string language;
    std::vector<CorrectnessVerdict> tasks;
};

struct AnnotationBatchSet {
    std::vector<AnnotationBatch> batches;
};

/// Per language and label, round(fraction * count) verdicts (at least one
/// for a non-empty stratum) are drawn without replacement. NoResponse
/// verdicts are not sampled. Each language's sample is shuffled and split
/// into @p n_batches near-equal batches, earlier batches taking the extra
/// item. Throws InvalidArgument unless 0 < fraction <= 1.
AnnotationBatchSet stratified_sample(const std::vector<CorrectnessVerdict>& verdicts, double fraction,
                                     std::uint64_t seed, std::size_t n_batches = 2);

nlohmann::json to_json(const CorrectnessVerdict& v);
CorrectnessVerdict verdict_from_json(const nlohmann::json& j);
std::string verdicts_jsonl(const std::vector<CorrectnessVerdict>& verdicts);
std::vector<CorrectnessVerdict> parse_verdicts_jsonl(std::string_view contents);

nlohmann::json to_json(const AnnotationBatchSet& set);
AnnotationBatchSet batch_set_from_json(const nlohmann::json& j);

}  // namespace crossling::correctness
