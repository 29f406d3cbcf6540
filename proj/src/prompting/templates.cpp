#include "crossling/prompting/templates.hpp"

#include <algorithm>
#include <optional>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::prompting {

namespace {

const std::string kPhase1 =
    "You are an expert in medicine, health, and pharmaceutics. Please answer this health- and medical-related "
    "queries in [LANGUAGE]. Your answers should be in one or more paragraphs without listing points/lists.\n"
    "Question: [QUESTION]";

const std::string kPhase2 =
    "Given below is the question and two answers written in [LANGUAGE] for the question.\n"
    "Question: [QUESTION]\n"
    "Answer 1: [ANSWER 1]\n"
    "Answer 2: [ANSWER 2]\n"
    "\n"
    "Compare Answer 2 with Answer 1 on the basis of answer similarity, comprehensiveness and appropriateness.\n"
    "Answer 2 contradicts Answer 1 if Answer 2 provides any information that contradicts the information provided "
    "in Answer 1 and Answer 2 incorrectly answers the Question.\n"
    "Answer 2 is neither contradictory nor similar if Answer 2 answers the Question but Answer 1 and Answer 2 are "
    "dissimilar. First, evaluate whether Answer 2 provides similar information, contradictory information as "
    "compared to Answer 1. Support the evaluation with a reasoning. Only if both answers are similar, evaluate the "
    "comprehensiveness and appropriateness of Answer 2 in comparison to Answer 1 and provide a reasoning for it.\n"
    "Finally, based on the previous evaluation, choose one option from the following option:\n"
    "\n"
    "1) Answer 2 provides neither contradictory nor similar information in comparison to Answer 1\n"
    "2) Answer 2 provides contradictory information compared to Answer 1\n"
    "3) Answer 2 provides more comprehensive and appropriate information.\n"
    "4) Answer 2 provides less comprehensive and appropriate information\n"
    "\n"
    "Your answer should first provide all reasoning followed by the chosen option string in the last line. The "
    "chosen option string should be an exact match with one of the given options.";

const std::string kConsistency =
    "You are an expert in medicine, health, and pharmaceutics. Please answer the following medical question or "
    "give your medical diagnosis based on the following scenario.\n"
    "Question: [QUESTION]";

const std::string kVerifiability =
    "You are an expert in medicine, health, and pharmaceuticals. Respond to me whether the following response is "
    "a correct answer (or diagnosis) to the following question (or scenario).\n"
    "Question: [QUESTION]\n"
    "Answer: [ANSWER]";

bool is_placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ' '; }

// Placeholder name starting at body[open] == '[', if any.
std::optional<std::string> placeholder_at(const std::string& body, std::size_t open) {
    const auto close = body.find(']', open + 1);
    if (close == std::string::npos || close == open + 1) return std::nullopt;
    const auto name = body.substr(open + 1, close - open - 1);
    if (name.front() < 'A' || name.front() > 'Z' || name.back() == ' ') return std::nullopt;
    if (!std::all_of(name.begin(), name.end(), is_placeholder_char)) return std::nullopt;
    return name;
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
    switch (id) {
        case TemplateId::CorrectnessPhase1: return "CorrectnessPhase1";
        case TemplateId::CorrectnessPhase2: return "CorrectnessPhase2";
        case TemplateId::Consistency: return "Consistency";
        case TemplateId::Verifiability: return "Verifiability";
    }
    return "?";
}

TemplateId parse_template_id(std::string_view s) {
    for (auto id : {TemplateId::CorrectnessPhase1, TemplateId::CorrectnessPhase2, TemplateId::Consistency,
                    TemplateId::Verifiability}) {
        if (s == to_string(id)) return id;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown template id '" + std::string(s) + "'");
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    for (auto pos = body.find('['); pos != std::string::npos; pos = body.find('[', pos + 1)) {
        if (auto name = placeholder_at(body, pos); name && std::find(out.begin(), out.end(), *name) == out.end()) {
            out.push_back(*name);
        }
    }
    return out;
}

const PromptTemplate& builtin_template(TemplateId id) {
    static const PromptTemplate phase1{TemplateId::CorrectnessPhase1, kPhase1};
    static const PromptTemplate phase2{TemplateId::CorrectnessPhase2, kPhase2};
    static const PromptTemplate consistency{TemplateId::Consistency, kConsistency};
    static const PromptTemplate verifiability{TemplateId::Verifiability, kVerifiability};
    switch (id) {
        case TemplateId::CorrectnessPhase1: return phase1;
        case TemplateId::CorrectnessPhase2: return phase2;
        case TemplateId::Consistency: return consistency;
        case TemplateId::Verifiability: return verifiability;
    }
    return phase1;
}

PromptTemplate load_template(TemplateId id, const std::filesystem::path& path) {
    return {id, read_file(path)};
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    const auto& body = tmpl.body;
    std::string out;
    out.reserve(body.size() + 256);
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto open = body.find('[', pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, open - pos);
        const auto name = placeholder_at(body, open);
        if (!name) {
            out.push_back('[');
            pos = open + 1;
            continue;
        }
        const auto it = bindings.find(*name);
        if (it == bindings.end()) {
            throw Error(ErrorKind::UnboundPlaceholder,
                        "[" + *name + "] in template " + std::string(to_string(tmpl.id)));
        }
        out += it->second;
        pos = open + name->size() + 2;
    }
    return out;
}

std::string render(TemplateId id, const Bindings& bindings) { return render(builtin_template(id), bindings); }

std::string language_name(std::string_view tag) {
    static const std::map<std::string, std::string, std::less<>> names{
        {"en", "English"}, {"es", "Spanish"}, {"zh", "Chinese"}, {"hi", "Hindi"},
        {"fr", "French"},  {"de", "German"},  {"ar", "Arabic"},  {"pt", "Portuguese"},
    };
    auto it = names.find(tag);
    return it == names.end() ? std::string(tag) : it->second;
}

}  // namespace crossling::prompting
