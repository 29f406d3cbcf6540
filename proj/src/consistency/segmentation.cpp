#include "crossling/consistency/segmentation.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::consistency {

namespace {

std::unique_ptr<icu::BreakIterator> make_iterator(bool sentences) {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(sentences
                                               ? icu::BreakIterator::createSentenceInstance(icu::Locale::getRoot(), status)
                                               : icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status)) throw Error(ErrorKind::IoError, std::string("ICU break iterator: ") + u_errorName(status));
    return it;
}

// Break iterators are expensive to build and not thread-safe; one clone per thread.
icu::BreakIterator& word_iterator() {
    thread_local auto it = make_iterator(false);
    return *it;
}

icu::BreakIterator& sentence_iterator() {
    thread_local auto it = make_iterator(true);
    return *it;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

bool is_ideographic(UChar32 c) {
    UErrorCode status = U_ZERO_ERROR;
    const auto script = uscript_getScript(c, &status);
    return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA;
}

bool has_word_char(const icu::UnicodeString& s) {
    for (int32_t i = 0; i < s.length();) {
        const UChar32 c = s.char32At(i);
        if (u_isalnum(c) || u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) return true;
        i += U16_LENGTH(c);
    }
    return false;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    const auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    auto& it = word_iterator();
    it.setText(u);
    int32_t start = it.first();
    for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
        const int32_t status = it.getRuleStatus();
        if (status < UBRK_WORD_NONE_LIMIT) continue;
        const icu::UnicodeString seg(u, start, end - start);
        if (!has_word_char(seg)) continue;
        if (status >= UBRK_WORD_IDEO && status < UBRK_WORD_IDEO_LIMIT) {
            // dictionary segmentation would group Han characters into words;
            // keep one token per ideograph so results do not depend on ICU's dictionary
            int32_t i = 0;
            std::string run;
            while (i < seg.length()) {
                const UChar32 c = seg.char32At(i);
                const int32_t len = U16_LENGTH(c);
                if (is_ideographic(c)) {
                    if (!run.empty()) {
                        out.push_back(std::move(run));
                        run.clear();
                    }
                    out.push_back(to_utf8(icu::UnicodeString(seg, i, len)));
                } else {
                    run += to_utf8(icu::UnicodeString(seg, i, len));
                }
                i += len;
            }
            if (!run.empty()) out.push_back(std::move(run));
            continue;
        }
        out.push_back(to_utf8(seg));
    }
    return out;
}

std::vector<std::string> fold_case(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto u = icu::UnicodeString::fromUTF8(t);
        u.foldCase();
        out.push_back(to_utf8(u));
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    const auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    auto& it = sentence_iterator();
    it.setText(u);
    int32_t start = it.first();
    for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
        const auto s = to_utf8(icu::UnicodeString(u, start, end - start));
        const auto t = trim(s);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::size_t response_length(std::string_view text) { return tokenize(text).size(); }

}  // namespace crossling::consistency
