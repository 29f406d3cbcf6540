#include "crossling/verifiability/verifiability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/parallel.hpp"
#include "crossling/common/rounding.hpp"
#include "crossling/prompting/templates.hpp"

namespace crossling::verifiability {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_truth(const std::vector<double>& scores, const std::vector<bool>& truth, std::size_t& pos,
                 std::size_t& neg) {
    if (scores.size() != truth.size())
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("{} scores for {} labels", scores.size(), truth.size()));
    pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), true));
    neg = truth.size() - pos;
    if (pos == 0 || neg == 0)
        throw Error(ErrorKind::SingleClass, fmt::format("{} positives and {} negatives", pos, neg));
}

// Twice the Mann-Whitney U of the positives, exact in integers.
std::uint64_t doubled_u(const std::vector<double>& scores, const std::vector<bool>& truth, std::size_t pos) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t doubled_avg = (i + 1) + j;  // ranks i+1..j
        for (std::size_t m = i; m < j; ++m)
            if (truth[order[m]]) doubled_rank_sum += doubled_avg;
        i = j;
    }
    return doubled_rank_sum - static_cast<std::uint64_t>(pos) * (pos + 1);
}

const std::vector<std::pair<std::string, double ClassificationReport::*>>& plain_metrics() {
    static const std::vector<std::pair<std::string, double ClassificationReport::*>> m{
        {"precision_macro", &ClassificationReport::precision_macro},
        {"recall_macro", &ClassificationReport::recall_macro},
        {"f1_macro", &ClassificationReport::f1_macro},
        {"accuracy", &ClassificationReport::accuracy}};
    return m;
}

}  // namespace

VerifiabilityOutcome judge(const corpus::VerifiabilityInstance& instance, llm::Gateway& gateway,
                           const JudgeOptions& options, std::size_t repeat) {
    VerifiabilityOutcome o;
    o.instance_id = instance.instance_id;
    o.question_id = instance.question.id;
    o.language = instance.question.language;
    o.temperature = options.temperature;
    o.repeat = repeat;
    o.truth = instance.label == corpus::Polarity::Positive;

    llm::CompletionRequest req;
    req.model = options.model;
    req.system_prompt = options.system_prompt;
    req.user_prompt = prompting::render(prompting::TemplateId::Verifiability,
                                        {{"QUESTION", instance.question.question}, {"ANSWER", instance.answer}});
    req.temperature = options.temperature;
    req.sample_index = repeat;
    req.max_tokens = options.max_tokens;
    req.language = o.language;
    o.cache_key = req.cache_key();

    try {
        const auto rec = gateway.complete(req);
        if (rec.filtered) {
            o.indeterminate = true;
            o.note = "filtered" + (rec.refusal_reason.empty() ? std::string() : ": " + rec.refusal_reason);
            return o;
        }
        const auto verdict = prompting::parse_verifiability_verdict(
            rec.text, options.lexicon ? *options.lexicon : prompting::Lexicon::builtin());
        o.predicted = verdict.prediction();
        o.indeterminate = verdict.outcome == prompting::VerdictOutcome::Indeterminate;
        o.note = verdict.note;
        if (o.indeterminate) spdlog::info("indeterminate verdict for {}: {}", o.instance_id, verdict.note);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::AuthError || e.kind() == ErrorKind::BudgetExceeded) throw;
        o.indeterminate = true;
        o.note = e.what();
        spdlog::warn("judge call failed for {}: {}", o.instance_id, e.what());
    }
    return o;
}

double rank_auc(const std::vector<double>& scores, const std::vector<bool>& truth) {
    std::size_t pos = 0, neg = 0;
    check_truth(scores, truth, pos, neg);
    return static_cast<double>(doubled_u(scores, truth, pos)) / (2.0 * static_cast<double>(pos) * neg);
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& truth) {
    std::size_t pos = 0, neg = 0;
    check_truth(scores, truth, pos, neg);
    std::uint64_t doubled = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!truth[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (truth[j]) continue;
            if (scores[i] > scores[j]) doubled += 2;
            else if (scores[i] == scores[j]) doubled += 1;
        }
    }
    return static_cast<double>(doubled) / (2.0 * static_cast<double>(pos) * neg);
}

ClassificationReport classification_metrics(const std::vector<VerifiabilityOutcome>& outcomes) {
    if (outcomes.empty()) throw Error(ErrorKind::EmptyInput, "no verifiability outcomes");
    ClassificationReport r;
    std::vector<double> scores;
    std::vector<bool> truth;
    scores.reserve(outcomes.size());
    truth.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.indeterminate && o.predicted) throw std::logic_error("indeterminate outcome predicted positive");
        if (o.truth) (o.predicted ? r.tp : r.fn)++;
        else (o.predicted ? r.fp : r.tn)++;
        scores.push_back(o.predicted ? 1.0 : 0.0);
        truth.push_back(o.truth);
    }
    const std::size_t p = r.tp + r.fn, n = r.tn + r.fp;
    r.precision_macro = (ratio(r.tp, r.tp + r.fp) + ratio(r.tn, r.tn + r.fn)) / 2.0;
    r.recall_macro = (ratio(r.tp, p) + ratio(r.tn, n)) / 2.0;
    const double sum = r.precision_macro + r.recall_macro;
    r.f1_macro = sum == 0.0 ? 0.0 : 2.0 * r.precision_macro * r.recall_macro / sum;
    r.accuracy = ratio(r.tp + r.tn, outcomes.size());
    if (p > 0 && n > 0) {
        // binary scores: 2U must equal TP*N + TN*P, i.e. AUC is balanced accuracy
        const auto u2 = doubled_u(scores, truth, p);
        if (u2 != static_cast<std::uint64_t>(r.tp) * n + static_cast<std::uint64_t>(r.tn) * p)
            throw std::logic_error("rank AUC disagrees with the confusion matrix");
        r.auc = static_cast<double>(u2) / (2.0 * static_cast<double>(p) * n);
    }
    return r;
}

MeanSd mean_sd(const std::vector<double>& values) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "no values to summarize");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

std::string format_mean_sd(const MeanSd& m, int decimals) {
    return format_fixed(m.mean, decimals) + " ± " + format_fixed(m.sd, decimals);
}

const std::vector<std::string>& report_metric_names() {
    static const std::vector<std::string> names{"precision_macro", "recall_macro", "f1_macro", "accuracy", "auc"};
    return names;
}

std::optional<double> report_metric(const ClassificationReport& r, const std::string& name) {
    if (name == "auc") return r.auc;
    for (const auto& [n, field] : plain_metrics())
        if (n == name) return r.*field;
    throw Error(ErrorKind::InvalidArgument, "unknown metric '" + name + "'");
}

VerifiabilityRun evaluate_verifiability(const std::vector<corpus::VerifiabilityInstance>& instances,
                                        llm::Gateway& gateway, const VerifiabilityOptions& options) {
    if (options.temperatures.empty()) throw Error(ErrorKind::InvalidArgument, "empty temperature grid");
    for (double t : options.temperatures)
        if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("temperature {} outside [0, 1]", t));
    for (const auto& inst : instances)
        if (inst.question.language != options.language)
            throw Error(ErrorKind::InvalidArgument, fmt::format("instance {} is '{}', run language is '{}'",
                                                                inst.instance_id, inst.question.language,
                                                                options.language));
    const std::size_t repeats = std::max<std::size_t>(1, options.repeats);

    VerifiabilityRun run;
    run.language = options.language;
    for (double tau : options.temperatures) {
        JudgeOptions jo = options.judge;
        jo.temperature = tau;
        TemperatureReport tr;
        tr.temperature = tau;
        tr.outcomes.resize(instances.size() * repeats);
        parallel_for_index(tr.outcomes.size(), options.workers, [&](std::size_t i) {
            tr.outcomes[i] = judge(instances[i / repeats], gateway, jo, i % repeats);
        });
        tr.report = classification_metrics(tr.outcomes);
        spdlog::info("verifiability {} tau={:.2f}: acc={:.4f} f1={:.4f}", options.language, tau,
                     tr.report.accuracy, tr.report.f1_macro);
        run.per_temperature.push_back(std::move(tr));
    }

    for (const auto& name : report_metric_names()) {
        std::vector<double> values;
        for (const auto& tr : run.per_temperature)
            if (auto v = report_metric(tr.report, name)) values.push_back(*v);
        if (values.size() == run.per_temperature.size()) run.summary[name] = mean_sd(values);
    }
    return run;
}

nlohmann::json to_json(const ClassificationReport& r) {
    nlohmann::json j{{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
    for (const auto& [name, field] : plain_metrics()) j[name] = r.*field;
    j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const VerifiabilityOutcome& o) {
    return {{"instance_id", o.instance_id}, {"question_id", o.question_id}, {"language", o.language},
            {"temperature", o.temperature}, {"repeat", o.repeat},           {"predicted", o.predicted},
            {"truth", o.truth},             {"indeterminate", o.indeterminate}, {"note", o.note},
            {"cache_key", o.cache_key}};
}

VerifiabilityOutcome outcome_from_json(const nlohmann::json& j) {
    try {
        VerifiabilityOutcome o;
        o.instance_id = j.at("instance_id").get<std::string>();
        o.question_id = j.at("question_id").get<std::string>();
        o.language = j.at("language").get<std::string>();
        o.temperature = j.at("temperature").get<double>();
        o.repeat = j.value("repeat", std::size_t{0});
        o.predicted = j.at("predicted").get<bool>();
        o.truth = j.at("truth").get<bool>();
        o.indeterminate = j.value("indeterminate", false);
        o.note = j.value("note", "");
        o.cache_key = j.value("cache_key", "");
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("verifiability outcome: ") + e.what());
    }
}

nlohmann::json to_json(const VerifiabilityRun& run) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& tr : run.per_temperature) {
        auto r = to_json(tr.report);
        r["temperature"] = tr.temperature;
        per.push_back(std::move(r));
    }
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [name, m] : run.summary)
        summary[name] = {{"mean", m.mean}, {"sd", m.sd}, {"text", format_mean_sd(m)}};
    return {{"language", run.language}, {"per_temperature", per}, {"summary", summary}};
}

std::string outcomes_jsonl(const VerifiabilityRun& run) {
    std::string out;
    for (const auto& tr : run.per_temperature)
        for (const auto& o : tr.outcomes) out += to_json(o).dump() + "\n";
    return out;
}

}  // namespace crossling::verifiability
