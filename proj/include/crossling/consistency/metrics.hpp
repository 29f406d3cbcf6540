/// @file metrics.hpp
/// @brief Similarity between pairs of answers: n-gram Jaccard, cosine,
/// greedy-matching BERTScore, and the all-pairs mean.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crossling::consistency {

/// What to do when an n-gram set is empty.
enum class EmptySetPolicy {
    Define,  ///< 1 when both sets are empty, 0 when exactly one is
    Throw,   ///< DegenerateInput
};

/// Jaccard index of the two n-gram sets (duplicates collapsed). Texts are
/// tokenized and case-folded first.
double ngram_similarity(std::string_view a, std::string_view b, std::size_t n,
                        EmptySetPolicy policy = EmptySetPolicy::Define);

/// Same, on pre-tokenized input.
double ngram_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t n,
                        EmptySetPolicy policy = EmptySetPolicy::Define);

/// Cosine in [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine(std::span<const float> a, std::span<const float> b);

/// Row-major token vectors: size() == n_tokens * dim.
struct TokenMatrix {
    std::size_t dim = 0;
    std::vector<float> data;

    [[nodiscard]] std::size_t rows() const noexcept { return dim ? data.size() / dim : 0; }
    [[nodiscard]] std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

struct BertScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Greedy matching without idf weights or baseline rescaling. Precision
/// averages, over tokens of @p b, the best cosine against tokens of @p a;
/// recall swaps the roles. F1 is 0 unless both P and R are positive, which
/// keeps it in [0, 1]. Throws EmptyTokens.
BertScore bertscore(const TokenMatrix& a, const TokenMatrix& b);

/// Reference implementation of bertscore, single-threaded.
BertScore bertscore_serial(const TokenMatrix& a, const TokenMatrix& b);

/// BERTScore from a precomputed cosine matrix (rows: tokens of a, columns:
/// tokens of b).
BertScore bertscore_from_cosines(const std::vector<std::vector<double>>& cos);

[[noreturn]] void throw_too_few(std::size_t n);

/// Unweighted mean of @p metric over all unordered pairs. Throws
/// TooFewAnswers below two items.
template <class T>
double pairwise_mean(const std::vector<T>& items, const std::function<double(const T&, const T&)>& metric) {
    if (items.size() < 2) throw_too_few(items.size());
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            sum += metric(items[i], items[j]);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

/// Mean pairwise n-gram similarity for many answer sets at once, one entry
/// per set. The parallel version spreads sets over OpenMP threads.
std::vector<double> batch_pairwise_ngram(const std::vector<std::vector<std::vector<std::string>>>& token_sets,
                                         std::size_t n);
std::vector<double> batch_pairwise_ngram_serial(
    const std::vector<std::vector<std::vector<std::string>>>& token_sets, std::size_t n);

/// Clamp to [0, 1] for reporting.
inline double clamp_unit(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace crossling::consistency
