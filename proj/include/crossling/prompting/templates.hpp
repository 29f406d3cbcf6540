/// @file templates.hpp
/// @brief Prompt templates with bracketed placeholders and single-pass rendering.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace crossling::prompting {

enum class TemplateId { CorrectnessPhase1, CorrectnessPhase2, Consistency, Verifiability };

std::string_view to_string(TemplateId id) noexcept;
TemplateId parse_template_id(std::string_view s);

struct PromptTemplate {
    TemplateId id;
    std::string body;  ///< UTF-8 text; placeholders look like [QUESTION] or [ANSWER 1]

    /// Placeholder names in order of first appearance, without brackets.
    [[nodiscard]] std::vector<std::string> placeholders() const;
};

/// Built-in template for @p id.
const PromptTemplate& builtin_template(TemplateId id);

/// Reads a template body from a UTF-8 text file.
PromptTemplate load_template(TemplateId id, const std::filesystem::path& path);

using Bindings = std::map<std::string, std::string>;

/// Replaces every placeholder in one left-to-right pass; bound values are
/// copied verbatim and never rescanned. A placeholder is "[" + upper-case
/// letters, digits and spaces + "]". Throws UnboundPlaceholder naming the
/// first placeholder without a binding.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);
std::string render(TemplateId id, const Bindings& bindings);

/// English display name for a language tag ("es" -> "Spanish"); unknown tags
/// are returned unchanged.
std::string language_name(std::string_view tag);

}  // namespace crossling::prompting
