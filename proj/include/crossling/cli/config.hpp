/// @file config.hpp
/// @brief Experiment configuration: a small TOML subset mapped onto RunConfig.
///
/// Accepted syntax: `[section]` headers, `key = value` lines where the value
/// is a JSON literal (string, number, bool, array, object), `#` comments and
/// `${NAME}` environment interpolation inside values.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace crossling::cli {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Sections become nested objects; keys outside any section sit at the top
/// level. Throws ConfigError with the 1-based line for malformed input, a
/// repeated key or an unset variable.
nlohmann::json parse_config_text(std::string_view text, const EnvLookup& env = process_env);

struct ProviderConfig {
    std::string kind = "mock";  ///< "mock" or "openai"
    std::filesystem::path fixture;  ///< mock responses; empty means every reply is "OK"
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    std::filesystem::path cache;  ///< empty means <output_dir>/cache.jsonl
    double requests_per_minute = 0.0;
    std::size_t max_calls = 0;
    double cost_per_call = 0.0;  ///< only used for the dry-run estimate
};

struct EmbeddingConfig {
    std::string kind = "hashing";  ///< "hashing" or "http"
    std::string base_url;
    std::string api_key_env;
    std::size_t dim = 64;
};

struct TranslationConfig {
    std::string kind = "none";  ///< "none", "echo" or "http"
    std::string base_url;
    std::string api_key_env;
};

struct RunConfig {
    std::filesystem::path output_dir = "out";
    std::size_t workers = 1;
    std::vector<std::string> languages{"en", "es", "zh", "hi"};
    std::vector<double> temperatures{0.0, 0.25, 0.5, 0.75, 1.0};
    std::size_t samples = 10;  ///< answers per question for consistency
    double fraction = 0.1;     ///< human-annotation sample share
    std::size_t batches = 2;   ///< annotation batches per language
    std::size_t negatives = 4;
    std::size_t repeats = 1;
    bool remove_stopwords = false;

    std::map<std::string, std::uint64_t> seeds{{"sampling", 1}, {"negatives", 1}, {"gibbs", 1}};
    std::map<std::string, std::filesystem::path> datasets;  ///< language -> file

    std::string answer_model = "gpt-3.5-turbo";
    std::string evaluator_model;  ///< empty: same as answer_model
    std::string judge_model;      ///< empty: same as answer_model

    ProviderConfig provider;
    EmbeddingConfig embedding;
    TranslationConfig translation;
};

/// Maps parsed config onto RunConfig. Relative paths resolve against
/// @p base_dir. Unknown sections or keys and wrongly typed values throw
/// ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

/// Range and consistency checks; throws ConfigError naming the field.
void validate(const RunConfig& config);

/// Experimental settings only: paths are reduced to file names so manifests
/// do not depend on where a run was started.
nlohmann::json manifest_view(const RunConfig& config);

std::vector<double> parse_double_list(std::string_view csv);
std::vector<std::string> parse_string_list(std::string_view csv);

}  // namespace crossling::cli
