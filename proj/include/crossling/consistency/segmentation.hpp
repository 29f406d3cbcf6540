/// @file segmentation.hpp
/// @brief Unicode word and sentence segmentation (ICU break iterators).

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crossling::consistency {

/// Word tokens in order. Segments without letters or digits (spaces,
/// punctuation, symbols) are dropped; ideographic runs are split into single
/// characters. Tokens keep their original case.
std::vector<std::string> tokenize(std::string_view text);

/// Unicode case folding of each token.
std::vector<std::string> fold_case(const std::vector<std::string>& tokens);

/// Sentences split on Unicode sentence boundaries, trimmed, empty ones dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Number of words, punctuation and spaces excluded.
std::size_t response_length(std::string_view text);

}  // namespace crossling::consistency
