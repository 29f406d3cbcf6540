#include "crossling/prompting/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::prompting {

using json = nlohmann::json;

namespace {

bool is_ascii_alnum(unsigned char c) { return std::isalnum(c) != 0; }

// Drops ASCII whitespace, NBSP and the ideographic space.
std::string squeeze_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) continue;
        if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) {
            ++i;
            continue;
        }
        if (c == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            static_cast<unsigned char>(s[i + 2]) == 0x80) {
            i += 2;
            continue;
        }
        out.push_back(s[i]);
    }
    return out;
}

std::string strip_trailing_punct(std::string s) {
    static const std::vector<std::string> wide{"。", "।", "！", "？", "．"};
    for (bool changed = true; changed && !s.empty();) {
        changed = false;
        if (std::ispunct(static_cast<unsigned char>(s.back()))) {
            s.pop_back();
            changed = true;
            continue;
        }
        for (const auto& w : wide) {
            if (s.size() >= w.size() && s.compare(s.size() - w.size(), w.size(), w) == 0) {
                s.resize(s.size() - w.size());
                changed = true;
                break;
            }
        }
    }
    return s;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// Word-ish boundary: only enforced on phrase edges that are ASCII alnum.
bool bounded_at(const std::string& text, std::size_t pos, const std::string& phrase) {
    const auto first = static_cast<unsigned char>(phrase.front());
    const auto last = static_cast<unsigned char>(phrase.back());
    if (is_ascii_alnum(first) && pos > 0) {
        const auto prev = static_cast<unsigned char>(text[pos - 1]);
        if (is_ascii_alnum(prev) || prev >= 0x80) return false;
    }
    const auto end = pos + phrase.size();
    if (is_ascii_alnum(last) && end < text.size()) {
        const auto next = static_cast<unsigned char>(text[end]);
        if (is_ascii_alnum(next) || next >= 0x80) return false;
    }
    return true;
}

std::vector<std::string> flatten_longest_first(const std::map<std::string, std::vector<std::string>>& by_lang) {
    std::set<std::string> unique;
    for (const auto& [_, words] : by_lang) {
        for (const auto& w : words) {
            if (!w.empty()) unique.insert(ascii_lower(w));
        }
    }
    std::vector<std::string> out(unique.begin(), unique.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
}

}  // namespace

std::string_view to_string(CorrectnessLabel label) noexcept {
    switch (label) {
        case CorrectnessLabel::NeitherContradictoryNorSimilar: return "NeitherContradictoryNorSimilar";
        case CorrectnessLabel::Contradictory: return "Contradictory";
        case CorrectnessLabel::MoreComprehensiveAppropriate: return "MoreComprehensiveAppropriate";
        case CorrectnessLabel::LessComprehensiveAppropriate: return "LessComprehensiveAppropriate";
        case CorrectnessLabel::NoResponse: return "NoResponse";
    }
    return "?";
}

CorrectnessLabel parse_label_name(std::string_view s) {
    for (auto l : kAllLabels) {
        if (s == to_string(l)) return l;
    }
    throw Error(ErrorKind::ParseError, "unknown correctness label '" + std::string(s) + "'");
}

std::string_view canonical_option(CorrectnessLabel label) noexcept {
    switch (label) {
        case CorrectnessLabel::NeitherContradictoryNorSimilar:
            return "Answer 2 provides neither contradictory nor similar information in comparison to Answer 1";
        case CorrectnessLabel::Contradictory: return "Answer 2 provides contradictory information compared to Answer 1";
        case CorrectnessLabel::MoreComprehensiveAppropriate:
            return "Answer 2 provides more comprehensive and appropriate information.";
        case CorrectnessLabel::LessComprehensiveAppropriate:
            return "Answer 2 provides less comprehensive and appropriate information";
        case CorrectnessLabel::NoResponse: return "";
    }
    return "";
}

std::string_view to_string(VerdictOutcome v) noexcept {
    switch (v) {
        case VerdictOutcome::Affirmative: return "Affirmative";
        case VerdictOutcome::Negative: return "Negative";
        case VerdictOutcome::Indeterminate: return "Indeterminate";
    }
    return "?";
}

const Lexicon& Lexicon::builtin() {
    static const Lexicon lex = [] {
        Lexicon l;
        l.options["en"] = {std::string(canonical_option(CorrectnessLabel::NeitherContradictoryNorSimilar)),
                           std::string(canonical_option(CorrectnessLabel::Contradictory)),
                           std::string(canonical_option(CorrectnessLabel::MoreComprehensiveAppropriate)),
                           std::string(canonical_option(CorrectnessLabel::LessComprehensiveAppropriate))};
        l.options["es"] = {"La Respuesta 2 no proporciona información contradictoria ni similar en comparación con la Respuesta 1",
                           "La Respuesta 2 proporciona información contradictoria en comparación con la Respuesta 1",
                           "La Respuesta 2 proporciona información más completa y apropiada.",
                           "La Respuesta 2 proporciona información menos completa y apropiada"};
        l.options["zh"] = {"答案2提供的信息与答案1相比既不矛盾也不相似",
                           "答案2提供的信息与答案1相矛盾",
                           "答案2提供了更全面、更恰当的信息。",
                           "答案2提供的信息不够全面和恰当"};
        l.options["hi"] = {"उत्तर 2 उत्तर 1 की तुलना में न तो विरोधाभासी और न ही समान जानकारी प्रदान करता है",
                           "उत्तर 2 उत्तर 1 की तुलना में विरोधाभासी जानकारी प्रदान करता है",
                           "उत्तर 2 अधिक व्यापक और उपयुक्त जानकारी प्रदान करता है।",
                           "उत्तर 2 कम व्यापक और उपयुक्त जानकारी प्रदान करता है"};

        l.affirmative["en"] = {"yes", "correct", "accurate"};
        l.negative["en"] = {"no", "not", "incorrect", "inaccurate", "wrong", "false", "not correct", "not a correct",
                            "not the correct", "not accurate", "not an accurate", "isn't", "isn’t", "isn't correct",
                            "isn’t correct", "isn't accurate"};
        l.affirmative["es"] = {"sí", "correcta", "correcto"};
        l.negative["es"] = {"no", "incorrecta", "incorrecto", "errónea", "erróneo", "no es correcta", "no es correcto"};
        l.affirmative["zh"] = {"是的", "正确", "对"};
        l.negative["zh"] = {"不正确", "错误", "不是", "不对", "否"};
        l.affirmative["hi"] = {"हाँ", "हां", "सही"};
        l.negative["hi"] = {"नहीं", "गलत", "ग़लत", "सही नहीं"};
        return l;
    }();
    return lex;
}

Lexicon Lexicon::from_json(const json& config) {
    Lexicon lex = builtin();
    try {
        const auto options = config.value("options", json::object());
        for (const auto& [lang, opts] : options.items()) {
            const auto v = opts.get<std::vector<std::string>>();
            if (v.size() != 4) throw Error(ErrorKind::ConfigError, "options for " + lang + " need exactly 4 strings");
            lex.options[lang] = {v[0], v[1], v[2], v[3]};
        }
        const auto affirmative = config.value("affirmative", json::object());
        for (const auto& [lang, words] : affirmative.items()) {
            lex.affirmative[lang] = words.get<std::vector<std::string>>();
        }
        const auto negative = config.value("negative", json::object());
        for (const auto& [lang, words] : negative.items()) {
            lex.negative[lang] = words.get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("lexicon: ") + e.what());
    }
    return lex;
}

ParsedCorrectness parse_correctness_label(std::string_view completion, const Lexicon& lexicon) {
    // normalized option -> label index
    std::vector<std::pair<std::string, std::size_t>> needles;
    for (const auto& [_, opts] : lexicon.options) {
        for (std::size_t i = 0; i < 4; ++i) {
            auto n = squeeze_spaces(strip_trailing_punct(std::string(trim(opts[i]))));
            if (!n.empty()) needles.emplace_back(std::move(n), i);
        }
    }

    // line start offsets
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < completion.size(); ++i) {
        if (completion[i] == '\n') starts.push_back(i + 1);
    }

    for (std::size_t li = starts.size(); li-- > 0;) {
        const auto begin = starts[li];
        const auto end = li + 1 < starts.size() ? starts[li + 1] - 1 : completion.size();
        const auto line = squeeze_spaces(completion.substr(begin, end - begin));
        if (line.empty()) continue;
        std::set<std::size_t> hits;
        for (const auto& [needle, label] : needles) {
            if (line.find(needle) != std::string::npos) hits.insert(label);
        }
        if (hits.size() != 1) continue;
        ParsedCorrectness out;
        out.label = static_cast<CorrectnessLabel>(*hits.begin());
        out.reasoning = std::string(trim(completion.substr(0, begin)));
        out.matched_line = li + 1;
        return out;
    }
    return {};
}

ParsedVerdict parse_verifiability_verdict(std::string_view completion, const Lexicon& lexicon) {
    const auto negatives = flatten_longest_first(lexicon.negative);
    const auto affirmatives = flatten_longest_first(lexicon.affirmative);
    std::string text = ascii_lower(trim(completion));

    // head: skip leading markup such as "**" or quotes
    std::size_t head = 0;
    while (head < text.size()) {
        const auto c = static_cast<unsigned char>(text[head]);
        if (c >= 0x80 || std::isalnum(c)) break;
        ++head;
    }
    const auto starts_with = [&](const std::string& w) {
        return text.compare(head, w.size(), w) == 0 && bounded_at(text, head, w);
    };
    // only the short yes/no-style words decide from the head
    for (const auto& w : negatives) {
        if (starts_with(w)) return {VerdictOutcome::Negative, "leading '" + w + "'"};
    }
    for (const auto& w : affirmatives) {
        if (starts_with(w)) return {VerdictOutcome::Affirmative, "leading '" + w + "'"};
    }

    std::vector<bool> used(text.size(), false);
    const auto scan = [&](const std::vector<std::string>& words, std::vector<std::string>& found) {
        for (const auto& w : words) {
            for (auto pos = text.find(w); pos != std::string::npos; pos = text.find(w, pos + 1)) {
                if (!bounded_at(text, pos, w)) continue;
                if (std::any_of(used.begin() + static_cast<std::ptrdiff_t>(pos),
                                used.begin() + static_cast<std::ptrdiff_t>(pos + w.size()), [](bool b) { return b; })) {
                    continue;
                }
                std::fill(used.begin() + static_cast<std::ptrdiff_t>(pos),
                          used.begin() + static_cast<std::ptrdiff_t>(pos + w.size()), true);
                found.push_back(w);
            }
        }
    };
    std::vector<std::string> neg_hits;
    std::vector<std::string> aff_hits;
    scan(negatives, neg_hits);
    scan(affirmatives, aff_hits);

    if (!neg_hits.empty() && aff_hits.empty()) return {VerdictOutcome::Negative, "contains '" + neg_hits.front() + "'"};
    if (!aff_hits.empty() && neg_hits.empty()) {
        return {VerdictOutcome::Affirmative, "contains '" + aff_hits.front() + "'"};
    }
    if (aff_hits.empty()) return {VerdictOutcome::Indeterminate, "no verdict vocabulary"};
    return {VerdictOutcome::Indeterminate, "both '" + aff_hits.front() + "' and '" + neg_hits.front() + "'"};
}

}  // namespace crossling::prompting
