#include "crossling/cli/config.hpp"

#include <cstdlib>
#include <set>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

std::string expand_env(std::string_view value, const EnvLookup& env, std::size_t line) {
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            const auto close = value.find('}', i + 2);
            if (close == std::string_view::npos) fail("line " + std::to_string(line) + ": unterminated ${");
            const std::string name(value.substr(i + 2, close - i - 2));
            const auto v = env(name);
            if (!v) fail("line " + std::to_string(line) + ": environment variable " + name + " is not set");
            out += *v;
            i = close;
        } else {
            out += value[i];
        }
    }
    return out;
}

// A '#' outside a string literal starts a comment.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && in_string) {
            ++i;
        } else if (line[i] == '"') {
            in_string = !in_string;
        } else if (line[i] == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

using Json = nlohmann::json;

class Reader {
public:
    Reader(const Json& obj, std::string section) : obj_(obj), section_(std::move(section)) {
        if (!obj_.is_object()) fail("[" + section_ + "] must be a table");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const Json::exception&) {
            fail(where(key) + " has the wrong type");
        }
    }

    void get_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
        std::string s;
        get(key, s);
        if (obj_.contains(key)) out = resolve(s, base);
    }

    void get_count(const char* key, std::size_t& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        if (!it->is_number_integer() || it->template get<long long>() < 0) fail(where(key) + " must be a non-negative integer");
        out = it->template get<std::size_t>();
    }

    void reject_unknown() const {
        for (const auto& [k, _] : obj_.items())
            if (!seen_.count(k)) fail("unknown key " + where(k));
    }

    static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
        std::filesystem::path p(s);
        return p.is_relative() && !base.empty() ? base / p : p;
    }

private:
    std::string where(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

    const Json& obj_;
    std::string section_;
    std::set<std::string> seen_;
};

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

Json parse_config_text(std::string_view text, const EnvLookup& env) {
    Json root = Json::object();
    Json* current = &root;
    std::size_t n = 0;
    const std::string owned(text);
    for (auto raw : split_lines(owned)) {
        ++n;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("line " + std::to_string(n) + ": malformed section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.empty()) fail("line " + std::to_string(n) + ": empty section name");
            if (root.contains(name)) fail("line " + std::to_string(n) + ": section [" + name + "] repeated");
            root[name] = Json::object();
            current = &root[name];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail("line " + std::to_string(n) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) fail("line " + std::to_string(n) + ": missing key");
        if (current->contains(key)) fail("line " + std::to_string(n) + ": key " + key + " repeated");
        const auto value = expand_env(trim(line.substr(eq + 1)), env, n);
        try {
            (*current)[key] = Json::parse(value);
        } catch (const Json::parse_error&) {
            fail("line " + std::to_string(n) + ": value for " + key + " is not a valid literal");
        }
    }
    return root;
}

RunConfig config_from_json(const Json& j, const std::filesystem::path& base) {
    RunConfig c;
    static const std::set<std::string> sections{"run",       "seeds",    "datasets",   "models",
                                                "provider", "embedding", "translation"};
    for (const auto& [k, _] : j.items())
        if (!sections.count(k)) fail("unknown section or key '" + k + "'");
    const Json empty = Json::object();
    auto section = [&](const char* name) -> const Json& { return j.contains(name) ? j.at(name) : empty; };

    Reader run(section("run"), "run");
    run.get_path("output_dir", c.output_dir, base);
    run.get_count("workers", c.workers);
    run.get("languages", c.languages);
    run.get("temperatures", c.temperatures);
    run.get_count("samples", c.samples);
    run.get("fraction", c.fraction);
    run.get_count("batches", c.batches);
    run.get_count("negatives", c.negatives);
    run.get_count("repeats", c.repeats);
    run.get("remove_stopwords", c.remove_stopwords);
    run.reject_unknown();

    const Json& seeds = section("seeds");
    if (!seeds.is_object()) fail("[seeds] must be a table");
    for (const auto& [k, v] : seeds.items()) {
        if (!c.seeds.count(k)) fail("unknown key seeds." + k);
        if (!v.is_number_unsigned()) fail("seeds." + k + " must be a non-negative integer");
        c.seeds[k] = v.get<std::uint64_t>();
    }

    const Json& datasets = section("datasets");
    if (!datasets.is_object()) fail("[datasets] must be a table");
    for (const auto& [lang, v] : datasets.items()) {
        if (!v.is_string()) fail("datasets." + lang + " must be a path string");
        c.datasets[lang] = Reader::resolve(v.get<std::string>(), base);
    }

    Reader models(section("models"), "models");
    models.get("answer", c.answer_model);
    models.get("evaluator", c.evaluator_model);
    models.get("judge", c.judge_model);
    models.reject_unknown();

    Reader p(section("provider"), "provider");
    p.get("kind", c.provider.kind);
    p.get_path("fixture", c.provider.fixture, base);
    p.get("base_url", c.provider.base_url);
    p.get("api_key_env", c.provider.api_key_env);
    p.get_path("cache", c.provider.cache, base);
    p.get("requests_per_minute", c.provider.requests_per_minute);
    p.get_count("max_calls", c.provider.max_calls);
    p.get("cost_per_call", c.provider.cost_per_call);
    p.reject_unknown();

    Reader e(section("embedding"), "embedding");
    e.get("kind", c.embedding.kind);
    e.get("base_url", c.embedding.base_url);
    e.get("api_key_env", c.embedding.api_key_env);
    e.get_count("dim", c.embedding.dim);
    e.reject_unknown();

    Reader t(section("translation"), "translation");
    t.get("kind", c.translation.kind);
    t.get("base_url", c.translation.base_url);
    t.get("api_key_env", c.translation.api_key_env);
    t.reject_unknown();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        fail("cannot read config " + path.string() + ": " + e.what());
    }
    auto c = config_from_json(parse_config_text(text, env), path.parent_path());
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    if (c.workers == 0) fail("run.workers must be at least 1");
    if (c.languages.empty()) fail("run.languages is empty");
    if (c.temperatures.empty()) fail("run.temperatures is empty");
    for (double t : c.temperatures)
        if (!(t >= 0.0 && t <= 1.0)) fail("run.temperatures must lie in [0, 1]");
    if (c.samples < 2) fail("run.samples must be at least 2");
    if (!(c.fraction > 0.0 && c.fraction <= 1.0)) fail("run.fraction must lie in (0, 1]");
    if (c.batches == 0) fail("run.batches must be at least 1");
    if (c.negatives == 0) fail("run.negatives must be at least 1");
    if (c.repeats == 0) fail("run.repeats must be at least 1");
    if (c.answer_model.empty()) fail("models.answer is empty");
    if (c.provider.kind != "mock" && c.provider.kind != "openai") fail("provider.kind must be mock or openai");
    if (c.provider.requests_per_minute < 0) fail("provider.requests_per_minute is negative");
    if (c.provider.cost_per_call < 0) fail("provider.cost_per_call is negative");
    if (c.embedding.kind != "hashing" && c.embedding.kind != "http") fail("embedding.kind must be hashing or http");
    if (c.embedding.kind == "http" && c.embedding.base_url.empty()) fail("embedding.base_url is required for http");
    if (c.embedding.dim == 0) fail("embedding.dim must be positive");
    if (c.translation.kind != "none" && c.translation.kind != "echo" && c.translation.kind != "http")
        fail("translation.kind must be none, echo or http");
    if (c.translation.kind == "http" && c.translation.base_url.empty()) fail("translation.base_url is required for http");
}

Json manifest_view(const RunConfig& c) {
    Json datasets = Json::object();
    for (const auto& [lang, path] : c.datasets) datasets[lang] = path.filename().string();
    return {
        {"languages", c.languages},
        {"temperatures", c.temperatures},
        {"samples", c.samples},
        {"fraction", c.fraction},
        {"batches", c.batches},
        {"negatives", c.negatives},
        {"repeats", c.repeats},
        {"remove_stopwords", c.remove_stopwords},
        {"datasets", datasets},
        {"models", {{"answer", c.answer_model}, {"evaluator", c.evaluator_model}, {"judge", c.judge_model}}},
        {"provider", {{"kind", c.provider.kind}, {"fixture", c.provider.fixture.filename().string()}}},
        {"embedding", {{"kind", c.embedding.kind}, {"dim", c.embedding.dim}}},
        {"translation", c.translation.kind},
    };
}

std::vector<double> parse_double_list(std::string_view csv) {
    std::vector<double> out;
    for (const auto& part : parse_string_list(csv)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size()) fail("'" + part + "' is not a number");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> parse_string_list(std::string_view csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        if (comma == std::string_view::npos) comma = csv.size();
        const auto item = trim(csv.substr(start, comma - start));
        if (!item.empty()) out.emplace_back(item);
        start = comma + 1;
    }
    return out;
}

}  // namespace crossling::cli
