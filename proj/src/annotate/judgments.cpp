#include "crossling/annotate/judgments.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::annotate {

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec);
}

double percent(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<Batch> batches_from(const correctness::AnnotationBatchSet& set) {
    std::vector<Batch> out;
    for (const auto& b : set.batches) {
        Batch batch{b.batch_id, b.language, {}};
        for (std::size_t i = 0; i < b.tasks.size(); ++i) {
            const auto& v = b.tasks[i];
            AnnotationTask t{b.batch_id + "/" + std::to_string(i + 1), b.batch_id, v.language, v.question,
                             v.ground_truth, v.llm_answer, v.reasoning, v.label};
            for (const auto* text : {&t.question, &t.ground_truth, &t.llm_answer, &t.reasoning})
                if (trim(*text).empty())
                    throw Error(ErrorKind::EmptyText, "task " + t.task_id + " (" + v.question_id + ") lacks a text");
            batch.tasks.push_back(std::move(t));
        }
        out.push_back(std::move(batch));
    }
    return out;
}

nlohmann::json to_json(const AnnotationTask& t) {
    return {{"task_id", t.task_id},         {"batch_id", t.batch_id},   {"language", t.language},
            {"question", t.question},       {"ground_truth", t.ground_truth}, {"llm_answer", t.llm_answer},
            {"reasoning", t.reasoning},     {"automated_label", prompting::to_string(t.automated_label)},
            {"automated_option", prompting::canonical_option(t.automated_label)}};
}

AnnotationTask task_from_json(const nlohmann::json& j) {
    try {
        return {j.at("task_id"),    j.at("batch_id"),   j.value("language", ""),
                j.at("question"),   j.at("ground_truth"), j.at("llm_answer"),
                j.at("reasoning"),  prompting::parse_label_name(j.at("automated_label").get<std::string>())};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("annotation task: ") + e.what());
    }
}

std::vector<std::string> validate(const Judgment& j) {
    std::vector<std::string> problems;
    if (trim(j.task_id).empty()) problems.emplace_back("task_id is required");
    if (trim(j.annotator_id).empty()) problems.emplace_back("annotator_id is required");
    if (!j.agrees) {
        if (trim(j.disagreement_reason).empty())
            problems.emplace_back("disagreement_reason is required when agrees is false");
        if (!j.corrected_label) problems.emplace_back("corrected_label is required when agrees is false");
        else if (*j.corrected_label == CorrectnessLabel::NoResponse)
            problems.emplace_back("corrected_label must be one of the four labels");
    }
    return problems;
}

nlohmann::json to_json(const Judgment& j) {
    nlohmann::json out{{"id", j.id},
                       {"task_id", j.task_id},
                       {"annotator_id", j.annotator_id},
                       {"agrees", j.agrees},
                       {"disagreement_reason", j.disagreement_reason},
                       {"corrected_label", j.corrected_label ? nlohmann::json(prompting::to_string(*j.corrected_label))
                                                             : nlohmann::json(nullptr)},
                       {"submitted_at", j.submitted_at}};
    if (j.supersedes) out["supersedes"] = *j.supersedes;
    return out;
}

Judgment judgment_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "judgment must be a JSON object");
    Judgment out;
    try {
        out.task_id = j.value("task_id", "");
        out.annotator_id = j.value("annotator_id", "");
        if (!j.contains("agrees") || !j.at("agrees").is_boolean())
            throw Error(ErrorKind::ValidationFailed, "agrees must be true or false");
        out.agrees = j.at("agrees").get<bool>();
        out.disagreement_reason = j.value("disagreement_reason", "");
        if (j.contains("corrected_label") && !j.at("corrected_label").is_null()) {
            try {
                out.corrected_label = prompting::parse_label_name(j.at("corrected_label").get<std::string>());
            } catch (const Error& e) {
                throw Error(ErrorKind::ValidationFailed, e.what());
            }
        }
        out.submitted_at = j.value("submitted_at", "");
        out.id = j.value("id", std::uint64_t{0});
        if (j.contains("supersedes")) out.supersedes = j.at("supersedes").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("judgment: ") + e.what());
    }
    return out;
}

JudgmentStore::JudgmentStore(std::filesystem::path journal, Clock clock)
    : path_(std::move(journal)), clock_(clock ? std::move(clock) : Clock(utc_now)) {
    if (path_.empty()) return;
    if (std::filesystem::exists(path_)) {
        const std::string contents = read_file(path_);
        std::size_t line_no = 0;
        for (const auto& line : split_lines(contents)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                spdlog::warn("journal {}: skipping unparseable line {}", path_.string(), line_no);
                continue;
            }
            auto judgment = judgment_from_json(j);
            latest_[{judgment.task_id, judgment.annotator_id}] = log_.size();
            log_.push_back(std::move(judgment));
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw Error(ErrorKind::IoError, "cannot open journal " + path_.string());
}

Judgment JudgmentStore::append(Judgment j) {
    if (auto problems = validate(j); !problems.empty())
        throw Error(ErrorKind::ValidationFailed, join(problems, "; "));
    std::unique_lock lock(mutex_);
    j.id = log_.empty() ? 1 : log_.back().id + 1;
    j.submitted_at = clock_();
    j.supersedes.reset();
    const auto key = std::make_pair(j.task_id, j.annotator_id);
    if (auto it = latest_.find(key); it != latest_.end()) j.supersedes = log_[it->second].id;
    if (out_.is_open()) {
        out_ << to_json(j).dump() << '\n';
        out_.flush();
    }
    latest_[key] = log_.size();
    log_.push_back(j);
    return j;
}

std::vector<Judgment> JudgmentStore::current(const std::string& task_id) const {
    std::shared_lock lock(mutex_);
    std::vector<Judgment> out;
    for (auto it = latest_.lower_bound({task_id, ""}); it != latest_.end() && it->first.first == task_id; ++it)
        out.push_back(log_[it->second]);
    return out;
}

bool JudgmentStore::has_judged(const std::string& task_id, const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    return latest_.contains({task_id, annotator});
}

std::vector<Judgment> JudgmentStore::history() const {
    std::shared_lock lock(mutex_);
    return log_;
}

MajorityLabel majority_label(CorrectnessLabel automated, const std::vector<Judgment>& judgments) {
    if (judgments.empty()) throw Error(ErrorKind::NoJudgments, "no judgments for task");
    MajorityLabel m;
    for (const auto& j : judgments) {
        const auto label = j.agrees ? automated : j.corrected_label.value_or(CorrectnessLabel::NoResponse);
        ++m.votes[label];
    }
    std::size_t best = 0;
    for (const auto& [_, n] : m.votes) best = std::max(best, n);
    std::vector<CorrectnessLabel> leaders;
    for (auto l : prompting::kAllLabels)
        if (auto it = m.votes.find(l); it != m.votes.end() && it->second == best) leaders.push_back(l);
    m.tie = leaders.size() > 1;
    m.label = std::find(leaders.begin(), leaders.end(), automated) != leaders.end() ? automated : leaders.front();
    return m;
}

double BatchAgreement::correlation() const { return percent(majority_matches, tasks); }
double BatchAgreement::unanimity() const { return percent(unanimous, tasks); }

BatchAgreement correlation(const Batch& batch, const JudgmentStore& store) {
    BatchAgreement a{batch.batch_id, batch.language, batch.tasks.size(), 0, 0, 0};
    std::vector<std::string> missing;
    for (const auto& task : batch.tasks) {
        const auto judgments = store.current(task.task_id);
        if (judgments.empty()) {
            missing.push_back(task.task_id);
            continue;
        }
        const auto m = majority_label(task.automated_label, judgments);
        if (m.label == task.automated_label) ++a.majority_matches;
        if (m.tie) ++a.ties;
        if (std::all_of(judgments.begin(), judgments.end(), [](const Judgment& j) { return j.agrees; }))
            ++a.unanimous;
    }
    if (!missing.empty())
        throw Error(ErrorKind::IncompleteBatch,
                    fmt::format("{} of {} tasks unjudged: {}", missing.size(), batch.tasks.size(), join(missing, ", ")));
    return a;
}

double average_correlation(const std::vector<BatchAgreement>& batches) {
    if (batches.empty()) throw Error(ErrorKind::EmptyInput, "no batches to average");
    double sum = 0.0;
    for (const auto& b : batches) sum += b.correlation();
    return sum / static_cast<double>(batches.size());
}

nlohmann::json to_json(const BatchAgreement& a) {
    return {{"batch_id", a.batch_id},
            {"language", a.language},
            {"tasks", a.tasks},
            {"majority_matches", a.majority_matches},
            {"unanimous", a.unanimous},
            {"ties", a.ties},
            {"correlation", a.correlation()},
            {"unanimity", a.unanimity()}};
}

}  // namespace crossling::annotate
