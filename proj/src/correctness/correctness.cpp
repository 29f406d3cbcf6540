#include "crossling/correctness/correctness.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/csv.hpp"
#include "crossling/common/error.hpp"
#include "crossling/common/parallel.hpp"
#include "crossling/common/random.hpp"
#include "crossling/common/rounding.hpp"
#include "crossling/common/text.hpp"
#include "crossling/prompting/templates.hpp"

namespace crossling::correctness {

using json = nlohmann::json;
using prompting::TemplateId;

namespace {

llm::CompletionRequest make_request(const std::string& model, const RunOptions& options, std::string prompt) {
    llm::CompletionRequest req;
    req.model = model;
    req.system_prompt = options.system_prompt;
    req.user_prompt = std::move(prompt);
    req.temperature = options.temperature;
    req.max_tokens = options.max_tokens;
    req.language = options.language;
    return req;
}

std::string_view table_row_name(CorrectnessLabel l) {
    switch (l) {
        case CorrectnessLabel::MoreComprehensiveAppropriate: return "More comprehensive and appropriate";
        case CorrectnessLabel::LessComprehensiveAppropriate: return "Less comprehensive and appropriate";
        case CorrectnessLabel::NeitherContradictoryNorSimilar: return "Neither contradictory nor similar";
        case CorrectnessLabel::Contradictory: return "Contradictory";
        case CorrectnessLabel::NoResponse: return "No Response";
    }
    return "?";
}

constexpr std::array<CorrectnessLabel, 5> kTableOrder{
    CorrectnessLabel::MoreComprehensiveAppropriate, CorrectnessLabel::LessComprehensiveAppropriate,
    CorrectnessLabel::NeitherContradictoryNorSimilar, CorrectnessLabel::Contradictory, CorrectnessLabel::NoResponse};

}  // namespace

std::vector<Phase1Answer> run_phase1(const corpus::Dataset& dataset, llm::Gateway& gateway, const RunOptions& options) {
    for (const auto& row : dataset) {
        if (row.language != options.language) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("row {} is '{}', run language is '{}'", row.id, row.language, options.language));
        }
    }
    const auto language = prompting::language_name(options.language);
    std::vector<Phase1Answer> out(dataset.size());
    parallel_for_index(dataset.size(), options.workers, [&](std::size_t i) {
        const auto& row = dataset[i];
        auto& slot = out[i];
        slot.question_id = row.id;
        const auto req = make_request(
            options.model, options,
            prompting::render(TemplateId::CorrectnessPhase1, {{"LANGUAGE", language}, {"QUESTION", row.question}}));
        slot.cache_key = req.cache_key();
        try {
            const auto rec = gateway.complete(req);
            slot.filtered = rec.filtered;
            slot.answer = rec.text;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::AuthError || e.kind() == ErrorKind::BudgetExceeded) throw;
            slot.error = e.what();
            spdlog::warn("phase 1 failed for {}: {}", row.id, e.what());
        }
    });
    return out;
}

CorrectnessVerdict run_phase2(const corpus::QAPair& question, const Phase1Answer& answer, llm::Gateway& gateway,
                              const RunOptions& options) {
    CorrectnessVerdict v;
    v.question_id = question.id;
    v.dataset = question.dataset;
    v.language = question.language;
    v.question = question.question;
    v.ground_truth = question.answer;
    v.llm_answer = answer.answer;
    v.phase1_key = answer.cache_key;

    if (trim(answer.answer).empty()) {
        v.note = answer.filtered ? "phase 1 filtered" : (answer.error.empty() ? "empty answer" : answer.error);
        return v;
    }
    const auto req = make_request(options.evaluator_model.empty() ? options.model : options.evaluator_model, options,
                                  prompting::render(TemplateId::CorrectnessPhase2,
                                                    {{"LANGUAGE", prompting::language_name(question.language)},
                                                     {"QUESTION", question.question},
                                                     {"ANSWER 1", question.answer},
                                                     {"ANSWER 2", answer.answer}}));
    v.phase2_key = req.cache_key();
    try {
        const auto rec = gateway.complete(req);
        if (rec.filtered) {
            v.note = "phase 2 filtered";
            return v;
        }
        const auto parsed = prompting::parse_correctness_label(rec.text);
        v.label = parsed.label;
        if (parsed.label == CorrectnessLabel::NoResponse) {
            v.note = "no option string in phase 2 output";
        } else {
            // an option line with nothing before it still keeps the raw text as reasoning
            v.reasoning = parsed.reasoning.empty() ? std::string(trim(rec.text)) : parsed.reasoning;
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::AuthError || e.kind() == ErrorKind::BudgetExceeded) throw;
        v.note = e.what();
    }
    return v;
}

std::vector<CorrectnessVerdict> run_correctness(const corpus::Dataset& dataset, llm::Gateway& gateway,
                                                const RunOptions& options) {
    const auto answers = run_phase1(dataset, gateway, options);
    std::vector<CorrectnessVerdict> out(dataset.size());
    parallel_for_index(dataset.size(), options.workers,
                       [&](std::size_t i) { out[i] = run_phase2(dataset[i], answers[i], gateway, options); });
    return out;
}

std::size_t ContingencyTable::count(const std::string& language, CorrectnessLabel label) const {
    auto it = counts.find(language);
    if (it == counts.end()) return 0;
    auto jt = it->second.find(label);
    return jt == it->second.end() ? 0 : jt->second;
}

std::size_t ContingencyTable::total(const std::string& language) const {
    std::size_t n = 0;
    for (auto l : prompting::kAllLabels) n += count(language, l);
    return n;
}

std::vector<std::string> ContingencyTable::languages() const {
    static const std::vector<std::string> preferred{"en", "es", "zh", "hi"};
    std::vector<std::string> out;
    for (const auto& p : preferred) {
        if (counts.contains(p)) out.push_back(p);
    }
    for (const auto& [lang, _] : counts) {
        if (std::find(preferred.begin(), preferred.end(), lang) == preferred.end()) out.push_back(lang);
    }
    return out;
}

ContingencyTable aggregate_labels(const std::vector<CorrectnessVerdict>& verdicts,
                                  const std::vector<std::string>& languages) {
    ContingencyTable table;
    if (!verdicts.empty()) table.dataset = verdicts.front().dataset;
    const auto seed = [&](const std::string& lang) {
        auto& col = table.counts[lang];
        for (auto l : prompting::kAllLabels) col.try_emplace(l, 0);
    };
    for (const auto& lang : languages) seed(lang);
    for (const auto& v : verdicts) {
        if (v.dataset != table.dataset) {
            throw Error(ErrorKind::MixedDatasets, fmt::format("{} and {} in one table", corpus::to_string(table.dataset),
                                                              corpus::to_string(v.dataset)));
        }
        seed(v.language);
        ++table.counts[v.language][v.label];
    }
    return table;
}

std::string contingency_csv(const ContingencyTable& table) {
    const auto langs = table.languages();
    std::vector<std::string> header{"label"};
    header.insert(header.end(), langs.begin(), langs.end());
    std::string out = csv::format_row(header);
    for (auto l : kTableOrder) {
        std::vector<std::string> row{std::string(table_row_name(l))};
        for (const auto& lang : langs) row.push_back(std::to_string(table.count(lang, l)));
        out += csv::format_row(row);
    }
    return out;
}

AnnotationBatchSet stratified_sample(const std::vector<CorrectnessVerdict>& verdicts, double fraction,
                                     std::uint64_t seed, std::size_t n_batches) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("fraction {} outside (0, 1]", fraction));
    }
    if (n_batches == 0) throw Error(ErrorKind::InvalidArgument, "need at least one batch");

    // language -> label -> verdict indices, in input order
    std::map<std::string, std::map<CorrectnessLabel, std::vector<std::size_t>>> strata;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i].label == CorrectnessLabel::NoResponse) continue;
        strata[verdicts[i].language][verdicts[i].label].push_back(i);
    }

    Rng rng(seed);
    AnnotationBatchSet set;
    for (auto& [lang, by_label] : strata) {
        std::vector<std::size_t> picked;
        for (auto& [label, idx] : by_label) {
            auto take = static_cast<std::size_t>(round_half_away(fraction * static_cast<double>(idx.size()), 0));
            take = std::clamp<std::size_t>(take, 1, idx.size());
            for (std::size_t j = 0; j < take; ++j) {
                const auto r = j + static_cast<std::size_t>(rng.uniform_index(idx.size() - j));
                std::swap(idx[j], idx[r]);
                picked.push_back(idx[j]);
            }
        }
        rng.shuffle(std::span<std::size_t>(picked));

        const std::size_t base = picked.size() / n_batches;
        const std::size_t extra = picked.size() % n_batches;
        std::size_t pos = 0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            AnnotationBatch batch;
            batch.batch_id = fmt::format("{}-{}", lang, b + 1);
            batch.language = lang;
            const std::size_t size = base + (b < extra ? 1 : 0);
            for (std::size_t j = 0; j < size; ++j) batch.tasks.push_back(verdicts[picked[pos++]]);
            set.batches.push_back(std::move(batch));
        }
    }
    return set;
}

json to_json(const CorrectnessVerdict& v) {
    return json{{"question_id", v.question_id},
                {"dataset", corpus::to_string(v.dataset)},
                {"language", v.language},
                {"question", v.question},
                {"ground_truth", v.ground_truth},
                {"llm_answer", v.llm_answer},
                {"label", prompting::to_string(v.label)},
                {"reasoning", v.reasoning},
                {"note", v.note},
                {"phase1_key", v.phase1_key},
                {"phase2_key", v.phase2_key}};
}

CorrectnessVerdict verdict_from_json(const json& j) {
    try {
        CorrectnessVerdict v;
        v.question_id = j.at("question_id").get<std::string>();
        v.dataset = corpus::parse_dataset_name(j.at("dataset").get<std::string>());
        v.language = j.at("language").get<std::string>();
        v.question = j.value("question", "");
        v.ground_truth = j.value("ground_truth", "");
        v.llm_answer = j.value("llm_answer", "");
        v.label = prompting::parse_label_name(j.at("label").get<std::string>());
        v.reasoning = j.value("reasoning", "");
        v.note = j.value("note", "");
        v.phase1_key = j.value("phase1_key", "");
        v.phase2_key = j.value("phase2_key", "");
        return v;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("verdict: ") + e.what());
    }
}

std::string verdicts_jsonl(const std::vector<CorrectnessVerdict>& verdicts) {
    std::string out;
    for (const auto& v : verdicts) out += to_json(v).dump() + "\n";
    return out;
}

std::vector<CorrectnessVerdict> parse_verdicts_jsonl(std::string_view contents) {
    std::vector<CorrectnessVerdict> out;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(contents)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorKind::ParseError, fmt::format("verdicts line {}", line_no));
        out.push_back(verdict_from_json(j));
    }
    return out;
}

json to_json(const AnnotationBatchSet& set) {
    json batches = json::array();
    for (const auto& b : set.batches) {
        json tasks = json::array();
        for (const auto& t : b.tasks) tasks.push_back(to_json(t));
        batches.push_back({{"batch_id", b.batch_id}, {"language", b.language}, {"tasks", tasks}});
    }
    return json{{"batches", batches}};
}

AnnotationBatchSet batch_set_from_json(const json& j) {
    AnnotationBatchSet set;
    try {
        for (const auto& b : j.at("batches")) {
            AnnotationBatch batch;
            batch.batch_id = b.at("batch_id").get<std::string>();
            batch.language = b.value("language", "");
            for (const auto& t : b.at("tasks")) batch.tasks.push_back(verdict_from_json(t));
            set.batches.push_back(std::move(batch));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("batch set: ") + e.what());
    }
    return set;
}

}  // namespace crossling::correctness
