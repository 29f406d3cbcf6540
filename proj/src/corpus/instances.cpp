#include "crossling/corpus/instances.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <span>

#include "crossling/common/error.hpp"
#include "crossling/common/random.hpp"
#include "crossling/common/text.hpp"

namespace crossling::corpus {

namespace {

std::vector<VerifiabilityInstance> from_provided_negatives(const Dataset& dataset) {
    // Group rows by question text, keeping first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const QAPair*>> groups;
    for (const auto& row : dataset) {
        const std::string key(trim(row.question));
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&row);
    }

    std::vector<VerifiabilityInstance> out;
    for (const auto& key : order) {
        const auto& rows = groups[key];
        const auto pos = std::find_if(rows.begin(), rows.end(),
                                      [](const QAPair* r) { return r->polarity != Polarity::Negative; });
        if (pos == rows.end()) continue;  // negatives without a ground truth carry no question
        const QAPair& truth = **pos;
        std::size_t slot = 0;
        out.push_back({truth.id + "#" + std::to_string(slot++), truth, truth.answer, Polarity::Positive});
        for (const QAPair* r : rows) {
            if (r == &truth) continue;
            const auto label = r->polarity == Polarity::Negative ? Polarity::Negative : Polarity::Positive;
            out.push_back({truth.id + "#" + std::to_string(slot++), truth, r->answer, label});
        }
    }
    return out;
}

}  // namespace

std::vector<VerifiabilityInstance> build_verifiability_instances(const Dataset& dataset,
                                                                 std::size_t negatives_per_question,
                                                                 std::uint64_t seed) {
    const bool has_negatives =
        std::any_of(dataset.begin(), dataset.end(), [](const QAPair& p) { return p.polarity == Polarity::Negative; });
    if (has_negatives) return from_provided_negatives(dataset);

    std::vector<std::string> pool;
    {
        std::set<std::string> seen;
        for (const auto& row : dataset) {
            std::string a(trim(row.answer));
            if (seen.insert(a).second) pool.push_back(std::move(a));
        }
    }
    if (!dataset.empty() && pool.size() < negatives_per_question + 1) {
        throw Error(ErrorKind::InsufficientAnswers, "answer pool has " + std::to_string(pool.size()) +
                                                        " distinct answers, need " +
                                                        std::to_string(negatives_per_question + 1));
    }

    Rng rng(seed);
    std::vector<VerifiabilityInstance> out;
    out.reserve(dataset.size() * (1 + negatives_per_question));
    std::vector<std::size_t> candidates;
    for (const auto& row : dataset) {
        const std::string own(trim(row.answer));
        out.push_back({row.id + "#0", row, row.answer, Polarity::Positive});

        candidates.clear();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (pool[i] != own) candidates.push_back(i);
        }
        // Partial Fisher-Yates: the first n slots are a uniform sample without replacement.
        for (std::size_t s = 0; s < negatives_per_question; ++s) {
            const auto j = s + static_cast<std::size_t>(rng.uniform_index(candidates.size() - s));
            std::swap(candidates[s], candidates[j]);
            out.push_back({row.id + "#" + std::to_string(s + 1), row, pool[candidates[s]], Polarity::Negative});
        }
    }
    return out;
}

}  // namespace crossling::corpus
