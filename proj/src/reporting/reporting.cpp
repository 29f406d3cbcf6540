#include "crossling/reporting/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "crossling/common/csv.hpp"
#include "crossling/common/error.hpp"
#include "crossling/common/rounding.hpp"
#include "crossling/common/text.hpp"
#include "crossling/llmgate/types.hpp"

namespace crossling::reporting {

namespace {

using correctness::CorrectnessLabel;

[[noreturn]] void incomplete(const std::string& what, const std::vector<std::string>& missing) {
    throw Error(ErrorKind::IncompleteRun, what + " missing: " + join(missing, ", "));
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

const std::vector<std::pair<CorrectnessLabel, std::string>>& label_rows() {
    static const std::vector<std::pair<CorrectnessLabel, std::string>> rows{
        {CorrectnessLabel::MoreComprehensiveAppropriate, "More comprehensive and appropriate"},
        {CorrectnessLabel::LessComprehensiveAppropriate, "Less comprehensive and appropriate"},
        {CorrectnessLabel::NeitherContradictoryNorSimilar, "Neither contradictory nor similar"},
        {CorrectnessLabel::Contradictory, "Contradictory"}};
    return rows;
}

std::string dataset_name(const correctness::ContingencyTable& t) { return std::string(corpus::to_string(t.dataset)); }

std::string tau_text(double t) { return fmt::format("{:.2f}", t); }

}  // namespace

double relative_decrease(std::size_t count_lang, std::size_t count_en, std::size_t dataset_size) {
    if (dataset_size == 0) throw Error(ErrorKind::InvalidArgument, "dataset size is zero");
    return 100.0 * (static_cast<double>(count_en) - static_cast<double>(count_lang)) /
           static_cast<double>(dataset_size);
}

double english_baseline_decrease(std::size_t count_lang, std::size_t count_en) {
    if (count_en == 0) throw Error(ErrorKind::ZeroBaseline, "English count is zero");
    return 100.0 * (static_cast<double>(count_en) - static_cast<double>(count_lang)) / static_cast<double>(count_en);
}

double contradiction_multiplier(std::size_t count_lang, std::size_t count_en) {
    if (count_en == 0) throw Error(ErrorKind::ZeroBaseline, "English count is zero");
    return static_cast<double>(count_lang) / static_cast<double>(count_en);
}

std::string format_multiplier(std::size_t count_lang, std::size_t count_en) {
    if (count_en == 0) return "n/a";
    return format_fixed(contradiction_multiplier(count_lang, count_en), 2);
}

double percent_drop(double metric_lang, double metric_en) {
    if (metric_en == 0.0) throw Error(ErrorKind::ZeroBaseline, "English metric is zero");
    return 100.0 * (metric_lang - metric_en) / metric_en;
}

std::string format_percent_drop(double metric_lang, double metric_en) {
    if (metric_en == 0.0) return "n/a";
    auto text = format_fixed(percent_drop(metric_lang, metric_en), 1);
    if (text == "-0.0") text = "0.0";
    return text + "%";
}

std::string format_percent(double pct, int decimals) { return format_fixed(pct, decimals); }

nlohmann::json RunManifest::to_json() const {
    return {{"tool_version", tool_version},           {"config", config},
            {"seeds", seeds},                         {"models", models},
            {"temperatures", temperatures},           {"dataset_checksums", dataset_checksums},
            {"decisions", decisions}};
}

std::string RunManifest::hash() const { return sha256_hex(to_json().dump()); }

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    try {
        RunManifest m;
        m.tool_version = j.value("tool_version", m.tool_version);
        m.config = j.value("config", nlohmann::json::object());
        m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
        m.models = j.value("models", std::vector<std::string>{});
        m.temperatures = j.value("temperatures", std::vector<double>{});
        m.dataset_checksums = j.value("dataset_checksums", std::map<std::string, std::string>{});
        m.decisions = j.value("decisions", std::map<std::string, std::string>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
    }
}

std::map<std::string, std::string> default_decisions() {
    return {
        {"consistency.pairing", "all unordered pairs"},
        {"consistency.cosine", "mean clamped to [0,1]"},
        {"consistency.empty_ngram_set", "1 if both empty, 0 if one empty"},
        {"consistency.tokenizer", "ICU word boundaries, case-folded, one token per ideograph"},
        {"consistency.lang_cons", "mean over answers of per-answer sentence fraction"},
        {"consistency.bertscore", "greedy matching, no idf, no rescaling"},
        {"topics.lda", "collapsed Gibbs, alpha=50/n, beta=0.01, 1000 iterations, final state"},
        {"topics.hdp", "truncated stick-breaking Gibbs, gamma=1, alpha0=1, eta=0.5, truncation=150"},
        {"topics.inference", "fixed point against frozen topics"},
        {"verifiability.indeterminate", "counted as negative prediction"},
        {"verifiability.auc", "Mann-Whitney with ties as 1/2 on binary predictions"},
        {"verifiability.sd", "population sd across temperatures"},
        {"llmgate.samples", std::to_string(llm::kDefaultSamples)},
        {"llmgate.retry", "1 call + 3 retries, backoff 1s/4s/16s"},
        {"correctness.decrease", "relative to dataset size; English-baseline variant reported alongside"},
    };
}

Format parse_format(std::string_view s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    if (s == "markdown" || s == "md") return Format::Markdown;
    throw Error(ErrorKind::InvalidArgument, "unknown export format '" + std::string(s) + "'");
}

std::string_view extension(Format f) noexcept {
    switch (f) {
        case Format::Csv: return "csv";
        case Format::Json: return "json";
        case Format::Markdown: return "md";
    }
    return "txt";
}

std::string render(const Table& table, Format format, const std::string& manifest_hash) {
    switch (format) {
        case Format::Csv: {
            std::string out = "# manifest: " + manifest_hash + "\n";
            out += csv::format_row(table.header);
            for (const auto& row : table.rows) out += csv::format_row(row);
            return out;
        }
        case Format::Json:
            return nlohmann::json{{"table", table.name},
                                  {"manifest", manifest_hash},
                                  {"header", table.header},
                                  {"rows", table.rows}}
                       .dump(2) +
                   "\n";
        case Format::Markdown: {
            std::string out = "<!-- manifest: " + manifest_hash + " -->\n\n";
            if (!table.name.empty()) out += "### " + table.name + "\n\n";
            auto line = [](const std::vector<std::string>& cells) {
                std::string s = "|";
                for (const auto& c : cells) s += " " + md_cell(c) + " |";
                return s + "\n";
            };
            out += line(table.header);
            out += "|";
            for (std::size_t i = 0; i < table.header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
            out += "\n";
            for (const auto& row : table.rows) out += line(row);
            return out;
        }
    }
    return {};
}

Table parse_csv_table(std::string_view text, std::string name) {
    if (text.starts_with("# manifest:")) {
        const auto nl = text.find('\n');
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    auto rows = csv::parse(text);
    Table t;
    t.name = std::move(name);
    if (rows.empty()) return t;
    t.header = std::move(rows.front());
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].size() == 1 && rows[i][0].empty())) t.rows.push_back(std::move(rows[i]));
    return t;
}

std::vector<std::filesystem::path> write_exports(const std::filesystem::path& dir, const std::vector<Table>& tables,
                                                 const std::vector<Format>& formats, const RunManifest& manifest) {
    if (tables.empty()) throw Error(ErrorKind::IncompleteRun, "no tables to export");
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto hash = manifest.hash();
    const auto manifest_path = dir / "manifest.json";
    write_file(manifest_path, manifest.to_json().dump(2) + "\n");
    written.push_back(manifest_path);
    for (const auto& t : tables) {
        for (auto f : formats) {
            const auto path = dir / (t.name + "." + std::string(extension(f)));
            write_file(path, render(t, f, hash));
            written.push_back(path);
        }
    }
    return written;
}

Table correctness_table(const std::vector<correctness::ContingencyTable>& tables,
                        const std::vector<std::string>& languages) {
    if (tables.empty()) throw Error(ErrorKind::IncompleteRun, "no correctness results");
    Table t;
    t.name = "correctness_labels";
    t.header.push_back("label");
    std::vector<std::string> missing;
    for (const auto& table : tables) {
        for (const auto& lang : languages) {
            t.header.push_back(dataset_name(table) + "/" + lang);
            if (table.total(lang) == 0) missing.push_back(dataset_name(table) + "/" + lang);
        }
    }
    if (!missing.empty()) incomplete("correctness table", missing);

    auto add_row = [&](CorrectnessLabel label, const std::string& name) {
        std::vector<std::string> row{name};
        for (const auto& table : tables)
            for (const auto& lang : languages) row.push_back(std::to_string(table.count(lang, label)));
        t.rows.push_back(std::move(row));
    };
    for (const auto& [label, name] : label_rows()) add_row(label, name);
    bool any_missing_answer = false;
    for (const auto& table : tables)
        for (const auto& lang : languages)
            any_missing_answer |= table.count(lang, CorrectnessLabel::NoResponse) > 0;
    if (any_missing_answer) add_row(CorrectnessLabel::NoResponse, "No Response");
    return t;
}

Table correctness_comparison(const std::vector<correctness::ContingencyTable>& tables) {
    if (tables.empty()) throw Error(ErrorKind::IncompleteRun, "no correctness results");
    Table t;
    t.name = "correctness_vs_english";
    t.header = {"dataset",
                "language",
                "more_comprehensive",
                "decrease_vs_dataset_size_pct",
                "decrease_vs_english_pct",
                "contradictory",
                "contradiction_multiplier"};
    std::vector<std::string> missing;
    for (const auto& table : tables)
        if (table.total("en") == 0) missing.push_back(dataset_name(table) + "/en");
    if (!missing.empty()) incomplete("English baseline", missing);

    for (const auto& table : tables) {
        const auto more_en = table.count("en", CorrectnessLabel::MoreComprehensiveAppropriate);
        const auto contra_en = table.count("en", CorrectnessLabel::Contradictory);
        const auto size = table.total("en");
        for (const auto& lang : table.languages()) {
            if (lang == "en") continue;
            const auto more = table.count(lang, CorrectnessLabel::MoreComprehensiveAppropriate);
            const auto contra = table.count(lang, CorrectnessLabel::Contradictory);
            t.rows.push_back({dataset_name(table), lang, std::to_string(more),
                              format_percent(relative_decrease(more, more_en, size)),
                              more_en == 0 ? "n/a" : format_percent(english_baseline_decrease(more, more_en)),
                              std::to_string(contra), format_multiplier(contra, contra_en)});
        }
    }
    return t;
}

Table consistency_table(const std::vector<DatasetAggregates>& data, double temperature,
                        const std::vector<std::string>& languages) {
    if (data.empty()) throw Error(ErrorKind::IncompleteRun, "no consistency results");
    Table t;
    t.name = "consistency_tau_" + tau_text(temperature);
    t.header.push_back("metric");
    std::vector<std::vector<const consistency::ConsistencyAggregate*>> cells;
    std::vector<std::string> missing;
    for (const auto& d : data) {
        std::vector<const consistency::ConsistencyAggregate*> row;
        for (const auto& lang : languages) {
            t.header.push_back(d.dataset + "/" + lang);
            auto it = std::find_if(d.aggregates.begin(), d.aggregates.end(), [&](const auto& a) {
                return a.language == lang && std::abs(a.temperature - temperature) < 1e-9;
            });
            if (it == d.aggregates.end()) missing.push_back(d.dataset + "/" + lang + "@" + tau_text(temperature));
            row.push_back(it == d.aggregates.end() ? nullptr : &*it);
        }
        cells.push_back(std::move(row));
    }
    if (!missing.empty()) incomplete("consistency table", missing);

    for (const auto& metric : consistency::metric_names()) {
        std::vector<std::string> row{metric};
        for (std::size_t d = 0; d < data.size(); ++d) {
            const double en = cells[d][0]->means.at(metric);
            for (std::size_t l = 0; l < languages.size(); ++l) {
                const double v = cells[d][l]->means.at(metric);
                const auto value = format_fixed(v, 4);
                row.push_back(languages[l] == languages.front() ? value : value + "/" + format_percent_drop(v, en));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table verifiability_table(const std::vector<verifiability::VerifiabilityRun>& runs) {
    if (runs.empty()) throw Error(ErrorKind::IncompleteRun, "no verifiability results");
    Table t;
    t.name = "verifiability_summary";
    t.header.push_back("language");
    for (const auto& m : verifiability::report_metric_names()) t.header.push_back(m);
    for (const auto& run : runs) {
        std::vector<std::string> row{run.language};
        for (const auto& m : verifiability::report_metric_names()) {
            auto it = run.summary.find(m);
            row.push_back(it == run.summary.end() ? "n/a" : verifiability::format_mean_sd(it->second));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Heatmap verifiability_heatmap(const std::vector<verifiability::VerifiabilityRun>& runs, const std::string& metric) {
    if (runs.empty()) throw Error(ErrorKind::IncompleteRun, "no verifiability results");
    Heatmap h;
    h.metric = metric;
    std::set<double> all_taus;
    for (const auto& run : runs)
        for (const auto& tr : run.per_temperature) all_taus.insert(tr.temperature);
    h.taus.assign(all_taus.begin(), all_taus.end());
    std::vector<std::string> missing;
    for (const auto& run : runs) {
        h.languages.push_back(run.language);
        std::vector<std::optional<double>> row;
        for (double tau : h.taus) {
            auto it = std::find_if(run.per_temperature.begin(), run.per_temperature.end(),
                                   [&](const auto& tr) { return tr.temperature == tau; });
            if (it == run.per_temperature.end()) {
                missing.push_back(run.language + "@" + tau_text(tau));
                row.emplace_back();
            } else {
                row.push_back(verifiability::report_metric(it->report, metric));
            }
        }
        h.values.push_back(std::move(row));
    }
    if (!missing.empty()) incomplete("heatmap " + metric, missing);
    return h;
}

nlohmann::json to_json(const Heatmap& h) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& row : h.values) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        values.push_back(std::move(r));
    }
    return {{"metric", h.metric}, {"languages", h.languages}, {"taus", h.taus}, {"values", values}};
}

Table heatmap_table(const Heatmap& h) {
    Table t;
    t.name = "heatmap_" + h.metric;
    t.header.push_back("language");
    for (double tau : h.taus) t.header.push_back(tau_text(tau));
    for (std::size_t l = 0; l < h.languages.size(); ++l) {
        std::vector<std::string> row{h.languages[l]};
        for (const auto& v : h.values[l]) row.push_back(v ? format_fixed(*v, 4) : "n/a");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace crossling::reporting
