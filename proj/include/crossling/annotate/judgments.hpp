/// @file judgments.hpp
/// @brief Annotation tasks, the append-only judgment journal, majority
/// labels and automated-vs-human agreement.

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossling/correctness/correctness.hpp"

namespace crossling::annotate {

using prompting::CorrectnessLabel;

struct AnnotationTask {
    std::string task_id;  ///< "<batch_id>/<n>", n from 1
    std::string batch_id;
    std::string language;
    std::string question;
    std::string ground_truth;
    std::string llm_answer;
    std::string reasoning;
    CorrectnessLabel automated_label = CorrectnessLabel::NoResponse;
};

struct Batch {
    std::string batch_id;
    std::string language;
    std::vector<AnnotationTask> tasks;
};

/// Tasks from the sampled verdicts, in batch order. Throws EmptyText when a
/// verdict lacks one of the four texts.
std::vector<Batch> batches_from(const correctness::AnnotationBatchSet& set);

nlohmann::json to_json(const AnnotationTask& t);
AnnotationTask task_from_json(const nlohmann::json& j);

struct Judgment {
    std::string task_id;
    std::string annotator_id;
    bool agrees = true;
    std::string disagreement_reason;
    std::optional<CorrectnessLabel> corrected_label;
    std::string submitted_at;
    std::uint64_t id = 0;                  ///< journal sequence number, from 1
    std::optional<std::uint64_t> supersedes;  ///< earlier id for the same task and annotator
};

/// Empty when valid; otherwise what is wrong, e.g. a disagreement without
/// reason or corrected label, or a NoResponse correction.
std::vector<std::string> validate(const Judgment& j);

nlohmann::json to_json(const Judgment& j);
/// Throws ValidationFailed or ParseError.
Judgment judgment_from_json(const nlohmann::json& j);

/// Append-only JSONL journal. The latest judgment per (task, annotator)
/// counts; earlier ones stay in the journal as the audit trail. An empty
/// path keeps everything in memory.
class JudgmentStore {
public:
    using Clock = std::function<std::string()>;

    explicit JudgmentStore(std::filesystem::path journal = {}, Clock clock = {});

    /// Validates, stamps id and time, links supersedes and persists. Throws
    /// ValidationFailed.
    Judgment append(Judgment j);

    /// Latest judgment per annotator for @p task_id, ordered by annotator.
    [[nodiscard]] std::vector<Judgment> current(const std::string& task_id) const;
    [[nodiscard]] bool has_judged(const std::string& task_id, const std::string& annotator) const;
    [[nodiscard]] std::vector<Judgment> history() const;

private:
    std::filesystem::path path_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::ofstream out_;
    std::vector<Judgment> log_;
    std::map<std::pair<std::string, std::string>, std::size_t> latest_;  // (task, annotator) -> log index
};

struct MajorityLabel {
    CorrectnessLabel label = CorrectnessLabel::NoResponse;
    bool tie = false;
    std::map<CorrectnessLabel, std::size_t> votes;
};

/// Agreeing votes count for the automated label, disagreeing ones for their
/// corrected label; the plurality wins. A tie goes to the automated label if
/// it is among the tied, else to the first tied label in canonical order,
/// and is flagged. Throws NoJudgments.
MajorityLabel majority_label(CorrectnessLabel automated, const std::vector<Judgment>& judgments);

struct BatchAgreement {
    std::string batch_id;
    std::string language;
    std::size_t tasks = 0;
    std::size_t majority_matches = 0;  ///< majority label equals the automated one
    std::size_t unanimous = 0;         ///< every annotator agreed
    std::size_t ties = 0;

    [[nodiscard]] double correlation() const;  ///< percent
    [[nodiscard]] double unanimity() const;    ///< percent
};

/// Throws IncompleteBatch naming the tasks without any judgment.
BatchAgreement correlation(const Batch& batch, const JudgmentStore& store);

/// Mean of the per-batch agreement fractions, as a percent. Throws EmptyInput.
double average_correlation(const std::vector<BatchAgreement>& batches);

nlohmann::json to_json(const BatchAgreement& a);

}  // namespace crossling::annotate
