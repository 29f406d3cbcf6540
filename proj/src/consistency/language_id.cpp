#include "crossling/consistency/language_id.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include "crossling/common/error.hpp"
#include "crossling/consistency/segmentation.hpp"

namespace crossling::consistency {

namespace {

constexpr std::string_view kEnglishSample =
    "Most people with a mild fever can stay at home, drink plenty of water and rest until they feel better. "
    "If the temperature stays high for more than three days, or if there is a stiff neck, confusion or trouble "
    "breathing, you should see a doctor right away. Children and older adults are at higher risk and should be "
    "checked sooner. Take the medicine exactly as your doctor or pharmacist tells you. Do not take more than the "
    "recommended dose, and tell them about any other medicines you are taking, including vitamins and herbal "
    "products. Some side effects, such as nausea or a headache, usually go away after a few days. Call your doctor "
    "if you notice a rash, swelling of the face or throat, or if the symptoms get worse. High blood pressure often "
    "has no symptoms, which is why it is important to have it measured regularly. Eating less salt, staying active "
    "and keeping a healthy weight can help lower it. Diabetes is a condition in which the body cannot use sugar "
    "properly. People with diabetes need to watch what they eat, check their blood sugar and sometimes take insulin. "
    "The answer depends on the cause of the pain and how long it has lasted. This treatment is usually safe during "
    "pregnancy, but you should always ask your health care provider first. Wash your hands often with soap and water "
    "to prevent the spread of infection. Vaccines protect you and the people around you from serious diseases.";

constexpr std::string_view kSpanishSample =
    "La mayoría de las personas con fiebre leve pueden quedarse en casa, beber mucha agua y descansar hasta que se "
    "sientan mejor. Si la temperatura sigue alta durante más de tres días, o si hay rigidez en el cuello, confusión "
    "o dificultad para respirar, debe consultar a un médico de inmediato. Los niños y los adultos mayores tienen un "
    "riesgo más alto y deben ser examinados antes. Tome el medicamento exactamente como le indique su médico o "
    "farmacéutico. No tome más de la dosis recomendada y infórmeles sobre cualquier otro medicamento que esté "
    "tomando, incluidas las vitaminas y los productos a base de hierbas. Algunos efectos secundarios, como las "
    "náuseas o el dolor de cabeza, suelen desaparecer después de unos días. Llame a su médico si nota una erupción, "
    "hinchazón de la cara o de la garganta, o si los síntomas empeoran. La presión arterial alta a menudo no tiene "
    "síntomas, por eso es importante medirla con regularidad. Comer menos sal, mantenerse activo y mantener un peso "
    "saludable puede ayudar a reducirla. La diabetes es una enfermedad en la que el cuerpo no puede usar el azúcar "
    "de forma adecuada. Las personas con diabetes deben cuidar lo que comen, controlar su nivel de azúcar en la "
    "sangre y a veces usar insulina. La respuesta depende de la causa del dolor y de cuánto tiempo ha durado. Este "
    "tratamiento suele ser seguro durante el embarazo, pero siempre debe preguntar primero a su proveedor de salud. "
    "Lávese las manos con frecuencia con agua y jabón para evitar la propagación de la infección. Las vacunas lo "
    "protegen a usted y a las personas que lo rodean de enfermedades graves.";

// 1- to 3-grams over each case-folded word padded with '_'.
std::unordered_map<std::string, std::size_t> ngram_counts(std::string_view text) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& word : fold_case(tokenize(text))) {
        const auto u = icu::UnicodeString::fromUTF8("_" + word + "_");
        std::vector<std::string> chars;
        for (int32_t i = 0; i < u.length();) {
            const UChar32 c = u.char32At(i);
            std::string s;
            icu::UnicodeString(c).toUTF8String(s);
            chars.push_back(std::move(s));
            i += U16_LENGTH(c);
        }
        for (std::size_t n = 1; n <= 3; ++n) {
            for (std::size_t i = 0; i + n <= chars.size(); ++i) {
                std::string g;
                for (std::size_t k = 0; k < n; ++k) g += chars[i + k];
                if (g != "_") ++counts[g];
            }
        }
    }
    return counts;
}

std::vector<std::string> ranked(const std::unordered_map<std::string, std::size_t>& counts, std::size_t limit) {
    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (items.size() > limit) items.resize(limit);
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& [g, _] : items) out.push_back(std::move(g));
    return out;
}

std::string script_language(UScriptCode script) {
    switch (script) {
        case USCRIPT_HAN: return "zh";
        case USCRIPT_DEVANAGARI: return "hi";
        case USCRIPT_HIRAGANA:
        case USCRIPT_KATAKANA: return "ja";
        case USCRIPT_HANGUL: return "ko";
        case USCRIPT_ARABIC: return "ar";
        case USCRIPT_CYRILLIC: return "ru";
        case USCRIPT_GREEK: return "el";
        case USCRIPT_THAI: return "th";
        default: return "";
    }
}

}  // namespace

TrigramLanguageIdentifier::TrigramLanguageIdentifier() {
    add_profile("en", kEnglishSample);
    add_profile("es", kSpanishSample);
}

void TrigramLanguageIdentifier::add_profile(const std::string& tag, std::string_view sample_text) {
    auto& profile = profiles_[tag];
    profile.clear();
    const auto grams = ranked(ngram_counts(sample_text), kProfileSize);
    for (std::size_t r = 0; r < grams.size(); ++r) profile[grams[r]] = r;
}

std::vector<std::string> TrigramLanguageIdentifier::latin_languages() const {
    std::vector<std::string> out;
    for (const auto& [tag, _] : profiles_) out.push_back(tag);
    return out;
}

std::string TrigramLanguageIdentifier::identify(std::string_view text) const {
    // script census over letters
    std::map<UScriptCode, std::size_t> scripts;
    std::size_t letters = 0;
    const auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    for (int32_t i = 0; i < u.length();) {
        const UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (!u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) continue;
        UErrorCode status = U_ZERO_ERROR;
        auto script = uscript_getScript(c, &status);
        if (U_FAILURE(status) || script == USCRIPT_COMMON || script == USCRIPT_INHERITED) continue;
        ++scripts[script];
        ++letters;
    }
    if (letters == 0) return "und";
    const auto top = std::max_element(scripts.begin(), scripts.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    if (top->first != USCRIPT_LATIN) {
        const auto tag = script_language(top->first);
        return tag.empty() ? "und" : tag;
    }
    if (profiles_.empty()) return "und";

    const auto doc = ranked(ngram_counts(text), kProfileSize);
    std::string best = "und";
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    for (const auto& [tag, profile] : profiles_) {
        std::size_t distance = 0;
        for (std::size_t r = 0; r < doc.size(); ++r) {
            auto it = profile.find(doc[r]);
            distance += it == profile.end() ? kProfileSize : (it->second > r ? it->second - r : r - it->second);
        }
        if (distance < best_distance) {
            best_distance = distance;
            best = tag;
        }
    }
    return best;
}

double answer_language_fraction(std::string_view answer, const std::string& target_language,
                                const LanguageIdentifier& identifier) {
    const auto sentences = split_sentences(answer);
    if (sentences.empty()) throw Error(ErrorKind::NoSentences, "answer has no sentences");
    std::size_t hits = 0;
    for (const auto& s : sentences) {
        if (identifier.identify(s) == target_language) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(sentences.size());
}

double language_consistency(const std::vector<std::string>& answers, const std::string& target_language,
                            const LanguageIdentifier& identifier) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& a : answers) {
        if (split_sentences(a).empty()) continue;
        sum += answer_language_fraction(a, target_language, identifier);
        ++counted;
    }
    if (counted == 0) throw Error(ErrorKind::NoSentences, "no answer has a sentence");
    return sum / static_cast<double>(counted);
}

}  // namespace crossling::consistency
