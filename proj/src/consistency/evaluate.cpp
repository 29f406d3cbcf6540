#include "crossling/consistency/evaluate.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/common/csv.hpp"
#include "crossling/common/error.hpp"
#include "crossling/common/parallel.hpp"
#include "crossling/common/text.hpp"
#include "crossling/consistency/metrics.hpp"
#include "crossling/consistency/segmentation.hpp"
#include "crossling/prompting/templates.hpp"

namespace crossling::consistency {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words{
        // en
        "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "in", "is", "it", "its", "of", "on",
        "or", "that", "the", "this", "to", "was", "were", "will", "with",
        // es
        "al", "con", "de", "del", "el", "en", "es", "la", "las", "los", "para", "por", "que", "se", "su", "un",
        "una", "y"};
    return words;
}

using Getter = double ConsistencyScores::*;

const std::vector<std::pair<std::string, Getter>>& metric_fields() {
    static const std::vector<std::pair<std::string, Getter>> fields{
        {"sim_1gram", &ConsistencyScores::sim_1gram},     {"sim_2gram", &ConsistencyScores::sim_2gram},
        {"length_mean", &ConsistencyScores::length_mean}, {"bertscore_f", &ConsistencyScores::bertscore_f},
        {"sim_sent", &ConsistencyScores::sim_sent},       {"sim_lda_20", &ConsistencyScores::sim_lda_20},
        {"sim_lda_100", &ConsistencyScores::sim_lda_100}, {"sim_hdp", &ConsistencyScores::sim_hdp},
        {"lang_cons", &ConsistencyScores::lang_cons}};
    return fields;
}

template <class T>
double mean_over_pairs(const std::vector<T>& items, auto&& metric) {
    return pairwise_mean<T>(items, [&](const T& a, const T& b) { return metric(a, b); });
}

void check_temperature(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("temperature {} outside [0, 1]", t));
}

std::string num(double x) { return fmt::format("{:.6f}", x); }

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : metric_fields()) out.push_back(name);
        return out;
    }();
    return names;
}

double metric_value(const ConsistencyScores& s, const std::string& metric) {
    for (const auto& [name, field] : metric_fields())
        if (name == metric) return s.*field;
    throw Error(ErrorKind::InvalidArgument, "unknown metric '" + metric + "'");
}

topics::Document topic_document(std::string_view text, bool remove_stopwords) {
    auto doc = topics::prepare_document(text);
    if (remove_stopwords) std::erase_if(doc, [](const std::string& w) { return stopwords().contains(w); });
    return doc;
}

TopicModels TopicModels::fit(const std::vector<std::string>& answers, const TopicOptions& options) {
    topics::Corpus corpus;
    corpus.reserve(answers.size());
    for (const auto& a : answers) corpus.push_back(topic_document(a, options.remove_stopwords));
    TopicModels m;
    parallel_for_index(3, 3, [&](std::size_t job) {
        switch (job) {
            case 0: m.lda20 = topics::fit_lda(corpus, options.lda20); break;
            case 1: m.lda100 = topics::fit_lda(corpus, options.lda100); break;
            default: m.hdp = topics::fit_hdp(corpus, options.hdp); break;
        }
    });
    return m;
}

std::vector<AnswerSet> collect_answer_sets(const corpus::Dataset& dataset, const ConsistencyOptions& options,
                                           llm::Gateway& gateway, std::vector<QuestionFailure>& failures) {
    const auto language = prompting::language_name(options.language);
    const std::size_t n = dataset.size();
    const std::size_t jobs = n * options.temperatures.size();
    std::vector<std::optional<AnswerSet>> sets(jobs);
    std::vector<std::optional<QuestionFailure>> failed(jobs);

    parallel_for_index(jobs, options.workers, [&](std::size_t job) {
        const auto& row = dataset[job % n];
        const double tau = options.temperatures[job / n];
        llm::CompletionRequest req;
        req.model = options.model;
        req.system_prompt = options.system_prompt;
        req.user_prompt =
            prompting::render(prompting::TemplateId::Consistency, {{"LANGUAGE", language}, {"QUESTION", row.question}});
        req.temperature = tau;
        req.max_tokens = options.max_tokens;
        req.language = options.language;
        try {
            AnswerSet set{row.id, options.language, tau, {}, 0};
            for (const auto& rec : gateway.generate_samples(req, options.k)) {
                if (rec.filtered || trim(rec.text).empty()) ++set.filtered;
                else set.answers.push_back(rec.text);
            }
            sets[job] = std::move(set);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::AuthError || e.kind() == ErrorKind::BudgetExceeded) throw;
            spdlog::warn("sampling failed for {} at temperature {}: {}", row.id, tau, e.what());
            failed[job] = QuestionFailure{row.id, tau, e.what()};
        }
    });

    std::vector<AnswerSet> out;
    for (std::size_t job = 0; job < jobs; ++job) {
        if (sets[job]) out.push_back(std::move(*sets[job]));
        if (failed[job]) failures.push_back(std::move(*failed[job]));
    }
    return out;
}

ConsistencyScores score_answer_set(const AnswerSet& set, const TopicModels& models, EmbeddingProvider& embeddings,
                                   const LanguageIdentifier& identifier, corpus::TranslationProvider* back_translation,
                                   bool remove_stopwords) {
    const auto& answers = set.answers;
    if (answers.size() < 2) throw_too_few(answers.size());

    ConsistencyScores s;
    s.question_id = set.question_id;
    s.language = set.language;
    s.temperature = set.temperature;
    s.k_effective = answers.size();
    s.filtered = set.filtered;

    std::vector<std::vector<std::string>> tokens;
    for (const auto& a : answers) tokens.push_back(fold_case(tokenize(a)));
    s.sim_1gram = mean_over_pairs(tokens, [](const auto& a, const auto& b) { return ngram_similarity(a, b, 1); });
    s.sim_2gram = mean_over_pairs(tokens, [](const auto& a, const auto& b) { return ngram_similarity(a, b, 2); });

    double length_sum = 0.0;
    for (const auto& a : answers) {
        const bool translate = back_translation != nullptr && set.language != "en";
        length_sum += static_cast<double>(
            response_length(translate ? back_translation->translate(a, set.language, "en") : a));
    }
    s.length_mean = length_sum / static_cast<double>(answers.size());

    std::vector<TokenMatrix> token_vectors;
    std::vector<std::vector<float>> sentence_vectors;
    for (const auto& a : answers) {
        token_vectors.push_back(embeddings.embed_tokens(a).vectors);
        sentence_vectors.push_back(embeddings.embed_sentence(a));
    }
    s.bertscore_f = clamp_unit(
        mean_over_pairs(token_vectors, [](const auto& a, const auto& b) { return bertscore_serial(a, b).f1; }));
    s.sim_sent_raw = mean_over_pairs(sentence_vectors, [](const auto& a, const auto& b) { return cosine(a, b); });
    s.sim_sent = clamp_unit(s.sim_sent_raw);

    auto topic_score = [&](const auto& model) {
        std::vector<topics::TopicDistribution> theta;
        for (const auto& a : answers)
            theta.push_back(topics::infer_topic_distribution(model, topic_document(a, remove_stopwords)));
        return clamp_unit(mean_over_pairs(theta, [](const auto& a, const auto& b) { return topics::topic_similarity(a, b); }));
    };
    s.sim_lda_20 = topic_score(models.lda20);
    s.sim_lda_100 = topic_score(models.lda100);
    s.sim_hdp = topic_score(models.hdp);

    s.lang_cons = language_consistency(answers, set.language, identifier);
    return s;
}

ConsistencyRun evaluate_consistency(const corpus::Dataset& dataset, const ConsistencyOptions& options,
                                    const ConsistencyProviders& providers) {
    for (const auto& row : dataset)
        if (row.language != options.language)
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("row {} is '{}', run language is '{}'", row.id, row.language, options.language));
    if (options.temperatures.empty()) throw Error(ErrorKind::InvalidArgument, "no temperatures given");
    for (double t : options.temperatures) check_temperature(t);

    ConsistencyRun run;
    const auto sets = collect_answer_sets(dataset, options, providers.gateway, run.failures);

    std::vector<std::string> all_answers;
    for (const auto& set : sets) all_answers.insert(all_answers.end(), set.answers.begin(), set.answers.end());
    if (sets.empty() || all_answers.empty()) {
        spdlog::warn("consistency run for {} produced no answers", options.language);
        for (const auto& set : sets) run.failures.push_back({set.question_id, set.temperature, "no usable answers"});
        return run;
    }
    spdlog::info("fitting topic models on {} answers ({})", all_answers.size(), options.language);
    const auto models = TopicModels::fit(all_answers, options.topics);

    std::vector<std::optional<ConsistencyScores>> scored(sets.size());
    std::vector<std::string> errors(sets.size());
    parallel_for_index(sets.size(), options.workers, [&](std::size_t i) {
        try {
            scored[i] = score_answer_set(sets[i], models, providers.embeddings, providers.identifier,
                                         providers.back_translation, options.topics.remove_stopwords);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (scored[i]) {
            run.scores.push_back(std::move(*scored[i]));
        } else {
            spdlog::warn("scoring failed for {} at temperature {}: {}", sets[i].question_id, sets[i].temperature,
                         errors[i]);
            run.failures.push_back({sets[i].question_id, sets[i].temperature, errors[i]});
        }
    }
    return run;
}

std::vector<ConsistencyAggregate> aggregate_scores(const std::vector<ConsistencyScores>& scores) {
    std::map<std::pair<std::string, double>, std::vector<const ConsistencyScores*>> groups;
    for (const auto& s : scores) groups[{s.language, s.temperature}].push_back(&s);
    std::vector<ConsistencyAggregate> out;
    for (const auto& [key, members] : groups) {
        ConsistencyAggregate agg{key.first, key.second, members.size(), {}};
        for (const auto& [name, field] : metric_fields()) {
            double sum = 0.0;
            for (const auto* s : members) sum += s->*field;
            agg.means[name] = sum / static_cast<double>(members.size());
        }
        out.push_back(std::move(agg));
    }
    return out;
}

std::string scores_csv(const std::vector<ConsistencyScores>& scores) {
    csv::Row header{"question_id", "language", "temperature", "k_effective", "filtered"};
    for (const auto& name : metric_names()) header.push_back(name);
    header.push_back("sim_sent_raw");
    std::string out = csv::format_row(header);
    for (const auto& s : scores) {
        csv::Row row{s.question_id, s.language, fmt::format("{:.2f}", s.temperature), std::to_string(s.k_effective),
                     std::to_string(s.filtered)};
        for (const auto& [_, field] : metric_fields()) row.push_back(num(s.*field));
        row.push_back(num(s.sim_sent_raw));
        out += csv::format_row(row);
    }
    return out;
}

std::vector<ConsistencyScores> parse_scores_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) return {};
    const auto& header = rows.front();
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorKind::MissingField, "scores CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto qid = column("question_id"), lang = column("language"), tau = column("temperature");
    std::vector<ConsistencyScores> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size())
            throw Error(ErrorKind::ParseError, fmt::format("scores CSV row {} has {} fields", r + 1, row.size()));
        try {
            ConsistencyScores s;
            s.question_id = row[qid];
            s.language = row[lang];
            s.temperature = std::stod(row[tau]);
            s.k_effective = std::stoul(row[column("k_effective")]);
            s.filtered = std::stoul(row[column("filtered")]);
            for (const auto& [name, field] : metric_fields()) s.*field = std::stod(row[column(name)]);
            s.sim_sent_raw = std::stod(row[column("sim_sent_raw")]);
            out.push_back(std::move(s));
        } catch (const std::logic_error& e) {
            throw Error(ErrorKind::ParseError, fmt::format("scores CSV row {}: {}", r + 1, e.what()));
        }
    }
    return out;
}

nlohmann::json to_json(const ConsistencyScores& s) {
    nlohmann::json j{{"question_id", s.question_id}, {"language", s.language},  {"temperature", s.temperature},
                     {"k_effective", s.k_effective}, {"filtered", s.filtered}};
    for (const auto& [name, field] : metric_fields()) j[name] = s.*field;
    j["sim_sent_raw"] = s.sim_sent_raw;
    return j;
}

ConsistencyScores scores_from_json(const nlohmann::json& j) {
    try {
        ConsistencyScores s;
        s.question_id = j.at("question_id").get<std::string>();
        s.language = j.at("language").get<std::string>();
        s.temperature = j.at("temperature").get<double>();
        s.k_effective = j.at("k_effective").get<std::size_t>();
        s.filtered = j.at("filtered").get<std::size_t>();
        for (const auto& [name, field] : metric_fields()) s.*field = j.at(name).get<double>();
        s.sim_sent_raw = j.value("sim_sent_raw", s.sim_sent);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("consistency scores: ") + e.what());
    }
}

std::string scores_jsonl(const std::vector<ConsistencyScores>& scores) {
    std::string out;
    for (const auto& s : scores) out += to_json(s).dump() + "\n";
    return out;
}

}  // namespace crossling::consistency
