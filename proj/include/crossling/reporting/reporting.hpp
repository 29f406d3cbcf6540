/// @file reporting.hpp
/// @brief Derived comparisons against English, result tables in
/// CSV/JSON/Markdown, heatmap matrices and the run manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossling/consistency/evaluate.hpp"
#include "crossling/correctness/correctness.hpp"
#include "crossling/verifiability/verifiability.hpp"

namespace crossling::reporting {

/// 100 * (count_en - count_lang) / dataset_size: the decrease measured
/// against the whole dataset. Throws InvalidArgument for a zero size.
double relative_decrease(std::size_t count_lang, std::size_t count_en, std::size_t dataset_size);

/// 100 * (count_en - count_lang) / count_en: the decrease measured against
/// the English count. Throws ZeroBaseline.
double english_baseline_decrease(std::size_t count_lang, std::size_t count_en);

/// count_lang / count_en. Throws ZeroBaseline.
double contradiction_multiplier(std::size_t count_lang, std::size_t count_en);
/// Two decimals, or "n/a" for a zero baseline.
std::string format_multiplier(std::size_t count_lang, std::size_t count_en);

/// 100 * (lang - en) / en. Throws ZeroBaseline.
double percent_drop(double metric_lang, double metric_en);
/// One decimal with sign and percent, e.g. "-3.0%"; "n/a" for a zero baseline.
std::string format_percent_drop(double metric_lang, double metric_en);

/// Fixed decimals after half-away-from-zero rounding.
std::string format_percent(double pct, int decimals = 2);

struct RunManifest {
    std::string tool_version = "0.1.0";
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> models;
    std::vector<double> temperatures;
    std::map<std::string, std::string> dataset_checksums;  ///< file name -> SHA-256
    std::map<std::string, std::string> decisions;          ///< harness defaults in effect

    [[nodiscard]] nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON (sorted keys, no whitespace).
    [[nodiscard]] std::string hash() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Defaults a run relies on that are not visible in its config.
std::map<std::string, std::string> default_decisions();

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

enum class Format { Csv, Json, Markdown };
Format parse_format(std::string_view s);
std::string_view extension(Format f) noexcept;

/// Deterministic text of @p table carrying @p manifest_hash: a leading
/// "# manifest: ..." line in CSV, an HTML comment in Markdown, a field in JSON.
std::string render(const Table& table, Format format, const std::string& manifest_hash);

/// Parses a CSV table written by render, skipping the manifest line.
Table parse_csv_table(std::string_view text, std::string name = {});

/// Writes manifest.json plus <name>.<ext> for every table and format into
/// @p dir. Returns the written paths in order. Throws IncompleteRun for an
/// empty table list.
std::vector<std::filesystem::path> write_exports(const std::filesystem::path& dir, const std::vector<Table>& tables,
                                                 const std::vector<Format>& formats, const RunManifest& manifest);

inline const std::vector<std::string> kPaperLanguages{"en", "es", "zh", "hi"};

/// Label counts with one column per dataset and language ("HealthQA/en", ...).
/// The No Response row is added only when some column has one. Throws
/// IncompleteRun listing every dataset/language column without verdicts.
Table correctness_table(const std::vector<correctness::ContingencyTable>& tables,
                        const std::vector<std::string>& languages = kPaperLanguages);

/// Per dataset and non-English language: decrease of the "more
/// comprehensive" count under both conventions and the contradiction
/// multiplier. Throws IncompleteRun when a table lacks English.
Table correctness_comparison(const std::vector<correctness::ContingencyTable>& tables);

struct DatasetAggregates {
    std::string dataset;
    std::vector<consistency::ConsistencyAggregate> aggregates;
};

/// Metrics as rows, dataset/language as columns at one temperature. English
/// cells hold the value, other languages "value/drop%". Throws IncompleteRun.
Table consistency_table(const std::vector<DatasetAggregates>& data, double temperature,
                        const std::vector<std::string>& languages = kPaperLanguages);

/// One row per language, one "mean ± sd" column per metric.
Table verifiability_table(const std::vector<verifiability::VerifiabilityRun>& runs);

struct Heatmap {
    std::string metric;
    std::vector<std::string> languages;
    std::vector<double> taus;
    std::vector<std::vector<std::optional<double>>> values;  ///< [language][tau]
};

/// Metric by language and temperature. Languages follow @p runs; every run
/// must cover the same temperatures. Throws IncompleteRun naming missing cells.
Heatmap verifiability_heatmap(const std::vector<verifiability::VerifiabilityRun>& runs, const std::string& metric);
nlohmann::json to_json(const Heatmap& h);
Table heatmap_table(const Heatmap& h);

}  // namespace crossling::reporting
