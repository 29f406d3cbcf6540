/// @file instances.hpp
/// @brief Positive/negative (question, answer) instances for claim checking.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossling/corpus/dataset.hpp"

namespace crossling::corpus {

struct VerifiabilityInstance {
    std::string instance_id;  ///< "<question id>#<slot>"
    QAPair question;          ///< the source row; question.answer is the ground truth
    std::string answer;       ///< the answer being judged
    Polarity label = Polarity::Positive;

    bool operator==(const VerifiabilityInstance&) const = default;
};

/// Default number of sampled negatives for datasets without provided ones.
inline constexpr std::size_t kDefaultNegativesPerQuestion = 4;

/// When the dataset carries explicit negatives (rows with polarity negative),
/// each question group yields its positive plus every provided negative and
/// no sampling happens. Otherwise every row is a question whose ground truth
/// is the positive, and @p negatives_per_question answers are drawn uniformly
/// without replacement from the dataset's distinct answers, excluding the
/// question's own answer. Throws InsufficientAnswers when the pool is too
/// small.
std::vector<VerifiabilityInstance> build_verifiability_instances(const Dataset& dataset,
                                                                 std::size_t negatives_per_question,
                                                                 std::uint64_t seed);

}  // namespace crossling::corpus
