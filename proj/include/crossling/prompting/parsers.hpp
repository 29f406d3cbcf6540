/// @file parsers.hpp
/// @brief Outcome extraction from free-text completions: the four-way
/// correctness label and the yes/no verifiability verdict.

#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace crossling::prompting {

enum class CorrectnessLabel {
    NeitherContradictoryNorSimilar,
    Contradictory,
    MoreComprehensiveAppropriate,
    LessComprehensiveAppropriate,
    NoResponse,
};

inline constexpr std::array<CorrectnessLabel, 5> kAllLabels{
    CorrectnessLabel::NeitherContradictoryNorSimilar, CorrectnessLabel::Contradictory,
    CorrectnessLabel::MoreComprehensiveAppropriate, CorrectnessLabel::LessComprehensiveAppropriate,
    CorrectnessLabel::NoResponse};

std::string_view to_string(CorrectnessLabel label) noexcept;
CorrectnessLabel parse_label_name(std::string_view s);

/// Canonical English option string for the four real labels ("" for NoResponse).
std::string_view canonical_option(CorrectnessLabel label) noexcept;

enum class VerdictOutcome { Affirmative, Negative, Indeterminate };

std::string_view to_string(VerdictOutcome v) noexcept;

/// Per-language option strings and yes/no vocabularies. English comes from
/// the prompt itself; es/zh/hi are our own translations and can be replaced
/// through configuration.
struct Lexicon {
    /// language -> the four option strings, indexed like CorrectnessLabel
    std::map<std::string, std::array<std::string, 4>> options;
    std::map<std::string, std::vector<std::string>> affirmative;
    std::map<std::string, std::vector<std::string>> negative;

    static const Lexicon& builtin();

    /// Built-in lexicon with entries from @p config laid over it:
    /// {"options": {"es": [4 strings]}, "affirmative": {"es": [...]}, "negative": {"es": [...]}}
    static Lexicon from_json(const nlohmann::json& config);
};

struct ParsedCorrectness {
    CorrectnessLabel label = CorrectnessLabel::NoResponse;
    std::string reasoning;  ///< text before the matched line, trimmed
    std::size_t matched_line = 0;  ///< 1-based; 0 when nothing matched
};

/// Scans lines from the last upward and stops at the first line containing
/// exactly one option string of any configured language. Matching ignores
/// whitespace and trailing punctuation of the option and is otherwise exact.
/// Text without such a line maps to NoResponse.
ParsedCorrectness parse_correctness_label(std::string_view completion, const Lexicon& lexicon = Lexicon::builtin());

struct ParsedVerdict {
    VerdictOutcome outcome = VerdictOutcome::Indeterminate;
    std::string note;  ///< what decided the outcome

    /// Indeterminate counts as a negative prediction.
    [[nodiscard]] bool prediction() const noexcept { return outcome == VerdictOutcome::Affirmative; }
};

/// A yes/no word at the start of the reply decides. Otherwise the reply is
/// scanned for whole-word vocabulary hits; negative phrases are consumed
/// first so "incorrect" or "not correct" never count as "correct". Hits on
/// both sides, or none, give Indeterminate.
ParsedVerdict parse_verifiability_verdict(std::string_view completion, const Lexicon& lexicon = Lexicon::builtin());

}  // namespace crossling::prompting
