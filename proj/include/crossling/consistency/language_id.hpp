/// @file language_id.hpp
/// @brief Sentence-level language identification and the language
/// consistency score.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace crossling::consistency {

class LanguageIdentifier {
public:
    virtual ~LanguageIdentifier() = default;
    /// Language tag for @p text, or "und" when nothing can be said.
    [[nodiscard]] virtual std::string identify(std::string_view text) const = 0;
};

/// Script first (Han -> zh, Devanagari -> hi, and a few others), then
/// Cavnar-Trenkle rank-order n-gram profiles for Latin-script text. Ships
/// profiles for en and es; more can be added from sample text.
class TrigramLanguageIdentifier final : public LanguageIdentifier {
public:
    TrigramLanguageIdentifier();

    void add_profile(const std::string& tag, std::string_view sample_text);
    [[nodiscard]] std::string identify(std::string_view text) const override;
    [[nodiscard]] std::vector<std::string> latin_languages() const;

    static constexpr std::size_t kProfileSize = 400;

private:
    std::map<std::string, std::map<std::string, std::size_t>> profiles_;  // tag -> n-gram -> rank
};

/// Per answer: share of its sentences identified as @p target_language.
/// Answers without sentences are skipped; the score is the mean over the
/// rest. Throws NoSentences when no answer has a sentence.
double language_consistency(const std::vector<std::string>& answers, const std::string& target_language,
                            const LanguageIdentifier& identifier);

/// Fraction for a single answer; NoSentences when it has none.
double answer_language_fraction(std::string_view answer, const std::string& target_language,
                                const LanguageIdentifier& identifier);

}  // namespace crossling::consistency
