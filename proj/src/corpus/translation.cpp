#include "crossling/corpus/translation.hpp"

#include <optional>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/http.hpp"
#include "crossling/common/parallel.hpp"
#include "crossling/stats/tests.hpp"

namespace crossling::corpus {

using json = nlohmann::json;

HttpTranslationProvider::HttpTranslationProvider(std::string base_url, std::string api_key_env)
    : base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env)) {}

std::string HttpTranslationProvider::translate(const std::string& text, const std::string& source_lang,
                                               const std::string& target_lang) {
    const json body{{"text", text}, {"source", source_lang}, {"target", target_lang}};
    std::map<std::string, std::string> headers;
    if (auto key = http::env_or_empty(api_key_env_); !key.empty()) headers["Authorization"] = "Bearer " + key;
    const auto res = http::post_json(base_url_, "/translate", body.dump(), headers);
    if (res.status != 200) {
        throw Error(ErrorKind::ProviderError,
                    "translate HTTP " + std::to_string(res.status) + (res.error.empty() ? "" : " " + res.error));
    }
    const auto parsed = json::parse(res.body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string()) {
        throw Error(ErrorKind::ProviderError, "translate response lacks 'text'");
    }
    return parsed["text"].get<std::string>();
}

TranslationResult translate_dataset(const Dataset& dataset, TranslationProvider& provider,
                                    const std::string& target_language, std::size_t workers) {
    for (const auto& row : dataset) {
        if (row.language == target_language) {
            throw Error(ErrorKind::InvalidArgument, "row " + row.id + " is already in " + target_language);
        }
    }
    std::vector<std::optional<QAPair>> slots(dataset.size());
    std::vector<std::optional<std::string>> errors(dataset.size());
    parallel_for_index(dataset.size(), workers, [&](std::size_t i) {
        const auto& src = dataset[i];
        try {
            QAPair out = src;
            out.question = provider.translate(src.question, src.language, target_language);
            out.answer = provider.translate(src.answer, src.language, target_language);
            out.language = target_language;
            slots[i] = std::move(out);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    TranslationResult result;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (slots[i]) {
            result.dataset.push_back(std::move(*slots[i]));
        } else {
            result.failures.push_back({i, dataset[i].id, errors[i].value_or("unknown failure")});
        }
    }
    if (!result.failures.empty()) {
        spdlog::warn("translation to {}: {} of {} rows failed", target_language, result.failures.size(),
                     dataset.size());
    }
    return result;
}

TranslationQualityReport score_translation_quality(const std::vector<TranslationJudgment>& judgments) {
    if (judgments.empty()) throw Error(ErrorKind::NoJudgments, "no translation judgments");

    struct Sums {
        double fluency = 0.0;
        double meaning = 0.0;
        std::size_t n = 0;
    };
    std::map<std::pair<std::string, std::string>, Sums> sums;
    // item key: (language, tool, example, dimension) -> annotator -> score
    using Item = std::tuple<std::string, std::string, std::string, int>;
    std::map<Item, std::map<std::string, int>> ratings;

    for (const auto& j : judgments) {
        if (j.fluency < 1 || j.fluency > 5 || j.meaning < 1 || j.meaning > 5) {
            throw Error(ErrorKind::InvalidArgument, "Likert score outside 1..5 for example " + j.example_id);
        }
        auto& s = sums[{j.tool, j.language}];
        s.fluency += j.fluency;
        s.meaning += j.meaning;
        ++s.n;
        ratings[{j.language, j.tool, j.example_id, 0}][j.annotator_id] = j.fluency;
        ratings[{j.language, j.tool, j.example_id, 1}][j.annotator_id] = j.meaning;
    }

    TranslationQualityReport report;
    for (const auto& [key, s] : sums) {
        report.cells[key] = {s.fluency / static_cast<double>(s.n), s.meaning / static_cast<double>(s.n), s.n};
    }

    // Pairwise kappa over co-rated items, per language and overall.
    const auto mean_pairwise_kappa = [&](const std::optional<std::string>& language) -> std::optional<double> {
        std::set<std::string> annotators;
        for (const auto& [item, by_annotator] : ratings) {
            if (language && std::get<0>(item) != *language) continue;
            for (const auto& [a, _] : by_annotator) annotators.insert(a);
        }
        double total = 0.0;
        std::size_t pairs = 0;
        for (auto a = annotators.begin(); a != annotators.end(); ++a) {
            for (auto b = std::next(a); b != annotators.end(); ++b) {
                std::vector<int> ra;
                std::vector<int> rb;
                for (const auto& [item, by_annotator] : ratings) {
                    if (language && std::get<0>(item) != *language) continue;
                    auto ia = by_annotator.find(*a);
                    auto ib = by_annotator.find(*b);
                    if (ia == by_annotator.end() || ib == by_annotator.end()) continue;
                    ra.push_back(ia->second);
                    rb.push_back(ib->second);
                }
                if (ra.empty()) continue;
                total += stats::cohens_kappa(ra, rb);
                ++pairs;
            }
        }
        if (pairs == 0) return std::nullopt;
        return total / static_cast<double>(pairs);
    };

    std::set<std::string> languages;
    for (const auto& j : judgments) languages.insert(j.language);
    for (const auto& lang : languages) {
        if (auto k = mean_pairwise_kappa(lang)) report.kappa_by_language[lang] = *k;
    }
    report.kappa = mean_pairwise_kappa(std::nullopt);
    return report;
}

}  // namespace crossling::corpus
