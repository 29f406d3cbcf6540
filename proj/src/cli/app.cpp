#include "crossling/cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crossling/annotate/server.hpp"
#include "crossling/cli/config.hpp"
#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"
#include "crossling/consistency/embedding.hpp"
#include "crossling/consistency/evaluate.hpp"
#include "crossling/consistency/language_id.hpp"
#include "crossling/corpus/instances.hpp"
#include "crossling/corpus/translation.hpp"
#include "crossling/correctness/correctness.hpp"
#include "crossling/llmgate/providers.hpp"
#include "crossling/reporting/reporting.hpp"
#include "crossling/stats/tests.hpp"
#include "crossling/verifiability/verifiability.hpp"

namespace crossling::cli {

namespace fs = std::filesystem;
using reporting::Table;

namespace {

struct Flags {
    std::string config;
    std::string lang;
    std::string out;
    std::size_t workers = 0;
    std::string tau;
    std::size_t k = 0;
    double fraction = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> datasets;  ///< lang=path
    std::string fixture;
    std::string formats = "csv,md,json";
    bool dry_run = false;
    std::string metric;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    RunConfig cfg;
    std::vector<reporting::Format> formats;
    bool dry_run = false;
    std::ostream& out;
    std::ostream& err;
};

Context make_context(const Flags& f, const char* seed_name, std::ostream& out, std::ostream& err) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.lang.empty()) cfg.languages = parse_string_list(f.lang);
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.workers) cfg.workers = f.workers;
    if (!f.tau.empty()) cfg.temperatures = parse_double_list(f.tau);
    if (f.k) cfg.samples = f.k;
    if (f.fraction > 0.0) cfg.fraction = f.fraction;
    if (f.seed && seed_name) cfg.seeds[seed_name] = *f.seed;
    for (const auto& d : f.datasets) {
        const auto eq = d.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--dataset expects lang=path, got '" + d + "'");
        cfg.datasets[d.substr(0, eq)] = d.substr(eq + 1);
    }
    if (!f.fixture.empty()) {
        cfg.provider.kind = "mock";
        cfg.provider.fixture = f.fixture;
    }
    validate(cfg);
    Context ctx{std::move(cfg), {}, f.dry_run, out, err};
    for (const auto& name : parse_string_list(f.formats)) ctx.formats.push_back(reporting::parse_format(name));
    if (ctx.formats.empty()) throw UsageError("--format lists no formats");
    return ctx;
}

std::map<std::string, corpus::Dataset> load_datasets(const RunConfig& cfg) {
    std::map<std::string, corpus::Dataset> out;
    for (const auto& lang : cfg.languages) {
        auto it = cfg.datasets.find(lang);
        if (it == cfg.datasets.end()) throw Error(ErrorKind::ConfigError, "no dataset configured for language " + lang);
        out[lang] = corpus::load_dataset(it->second);
    }
    return out;
}

reporting::RunManifest make_manifest(const RunConfig& cfg, const std::map<std::string, corpus::Dataset>& data,
                                     std::vector<std::string> models, std::vector<double> temperatures) {
    reporting::RunManifest m;
    m.config = manifest_view(cfg);
    m.seeds = cfg.seeds;
    models.erase(std::remove(models.begin(), models.end(), std::string()), models.end());
    std::sort(models.begin(), models.end());
    models.erase(std::unique(models.begin(), models.end()), models.end());
    m.models = std::move(models);
    m.temperatures = std::move(temperatures);
    for (const auto& [lang, ds] : data) m.dataset_checksums[cfg.datasets.at(lang).filename().string()] = corpus::dataset_checksum(ds);
    m.decisions = reporting::default_decisions();
    return m;
}

void write_manifest(const fs::path& dir, const reporting::RunManifest& m) {
    fs::create_directories(dir);
    write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

struct GatewayBundle {
    std::shared_ptr<llm::ResponseCache> cache;
    std::unique_ptr<llm::Gateway> gateway;
};

GatewayBundle make_gateway(const RunConfig& cfg) {
    std::shared_ptr<llm::ChatProvider> provider;
    if (cfg.provider.kind == "openai") {
        provider = std::make_shared<llm::OpenAiChatProvider>(cfg.provider.base_url, cfg.provider.api_key_env);
    } else if (!cfg.provider.fixture.empty()) {
        provider = llm::MockChatProvider::shared_from_file(cfg.provider.fixture);
    } else {
        provider = std::make_shared<llm::MockChatProvider>();
    }
    const auto cache_path = cfg.provider.cache.empty() ? cfg.output_dir / "cache.jsonl" : cfg.provider.cache;
    if (cache_path.has_parent_path()) fs::create_directories(cache_path.parent_path());
    GatewayBundle b;
    b.cache = std::make_shared<llm::ResponseCache>(cache_path);
    llm::GatewayConfig gc;
    gc.max_calls = cfg.provider.max_calls;
    gc.requests_per_minute = cfg.provider.requests_per_minute;
    b.gateway = std::make_unique<llm::Gateway>(provider, b.cache, gc);
    return b;
}

int report_plan(const Context& ctx, std::size_t calls) {
    ctx.out << "planned provider calls: " << calls << "\n";
    ctx.out << fmt::format("estimated budget: {:.2f}\n", static_cast<double>(calls) * ctx.cfg.provider.cost_per_call);
    return kOk;
}

void report_calls(const Context& ctx, const llm::Gateway& g) { ctx.out << "provider calls: " << g.provider_calls() << "\n"; }

std::string judge_model(const RunConfig& c) { return c.judge_model.empty() ? c.answer_model : c.judge_model; }

// ---- correctness ---------------------------------------------------------

int correctness_run(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto data = load_datasets(cfg);
    if (ctx.dry_run) {
        std::size_t n = 0;
        for (const auto& [_, ds] : data) n += 2 * ds.size();
        return report_plan(ctx, n);
    }
    const auto dir = cfg.output_dir / "correctness";
    write_manifest(dir, make_manifest(cfg, data, {cfg.answer_model, cfg.evaluator_model}, {0.0}));
    auto gw = make_gateway(cfg);
    for (const auto& lang : cfg.languages) {
        correctness::RunOptions opts;
        opts.model = cfg.answer_model;
        opts.evaluator_model = cfg.evaluator_model;
        opts.language = lang;
        opts.workers = cfg.workers;
        const auto verdicts = correctness::run_correctness(data.at(lang), *gw.gateway, opts);
        fs::create_directories(dir / lang);
        write_file(dir / lang / "verdicts.jsonl", correctness::verdicts_jsonl(verdicts));
        std::map<std::string, std::size_t> counts;
        for (const auto& v : verdicts) ++counts[std::string(prompting::to_string(v.label))];
        ctx.out << lang << ": " << verdicts.size() << " verdicts";
        for (const auto& [label, n] : counts) ctx.out << ", " << label << "=" << n;
        ctx.out << "\n";
    }
    report_calls(ctx, *gw.gateway);
    return kOk;
}

std::vector<correctness::CorrectnessVerdict> read_verdicts(const RunConfig& cfg) {
    std::vector<correctness::CorrectnessVerdict> all;
    for (const auto& lang : cfg.languages) {
        const auto path = cfg.output_dir / "correctness" / lang / "verdicts.jsonl";
        if (!fs::exists(path)) throw Error(ErrorKind::IncompleteRun, "no verdicts for " + lang + " at " + path.string());
        auto v = correctness::parse_verdicts_jsonl(read_file(path));
        all.insert(all.end(), v.begin(), v.end());
    }
    return all;
}

reporting::RunManifest manifest_from_disk(const RunConfig& cfg, const fs::path& dir) {
    const auto path = dir / "manifest.json";
    if (fs::exists(path)) return reporting::RunManifest::from_json(nlohmann::json::parse(read_file(path)));
    return make_manifest(cfg, {}, {cfg.answer_model}, cfg.temperatures);
}

int correctness_aggregate(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto verdicts = read_verdicts(cfg);
    std::map<corpus::DatasetName, std::vector<correctness::CorrectnessVerdict>> by_dataset;
    for (const auto& v : verdicts) by_dataset[v.dataset].push_back(v);
    std::vector<correctness::ContingencyTable> tables;
    for (const auto& [_, vs] : by_dataset) tables.push_back(correctness::aggregate_labels(vs, cfg.languages));
    std::vector<Table> out{reporting::correctness_table(tables, cfg.languages)};
    if (std::find(cfg.languages.begin(), cfg.languages.end(), "en") != cfg.languages.end())
        out.push_back(reporting::correctness_comparison(tables));
    const auto manifest = manifest_from_disk(cfg, cfg.output_dir / "correctness");
    for (const auto& p : reporting::write_exports(cfg.output_dir / "correctness" / "tables", out, ctx.formats, manifest))
        ctx.out << p.string() << "\n";
    return kOk;
}

int correctness_sample(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto verdicts = read_verdicts(cfg);
    const auto set = correctness::stratified_sample(verdicts, cfg.fraction, cfg.seeds.at("sampling"), cfg.batches);
    const auto dir = cfg.output_dir / "annotation";
    auto manifest = manifest_from_disk(cfg, cfg.output_dir / "correctness");
    manifest.seeds = cfg.seeds;
    manifest.config["fraction"] = cfg.fraction;
    manifest.config["batches"] = cfg.batches;
    write_manifest(dir, manifest);
    write_file(dir / "batches.json", correctness::to_json(set).dump(2) + "\n");
    Table t{"annotation_sample", {"batch", "language", "label", "count"}, {}};
    for (const auto& b : set.batches) {
        std::map<prompting::CorrectnessLabel, std::size_t> counts;
        for (const auto& v : b.tasks) ++counts[v.label];
        for (const auto& [label, n] : counts)
            t.rows.push_back({b.batch_id, b.language, std::string(prompting::to_string(label)), std::to_string(n)});
        ctx.out << b.batch_id << ": " << b.tasks.size() << " tasks\n";
    }
    reporting::write_exports(dir, {t}, ctx.formats, manifest);
    return kOk;
}

// ---- consistency ---------------------------------------------------------

int consistency_run(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto data = load_datasets(cfg);
    if (ctx.dry_run) {
        std::size_t n = 0;
        for (const auto& [_, ds] : data) n += ds.size() * cfg.samples * cfg.temperatures.size();
        return report_plan(ctx, n);
    }
    const auto dir = cfg.output_dir / "consistency";
    const auto manifest = make_manifest(cfg, data, {cfg.answer_model}, cfg.temperatures);
    write_manifest(dir, manifest);
    auto gw = make_gateway(cfg);

    std::unique_ptr<consistency::EmbeddingProvider> embeddings;
    if (cfg.embedding.kind == "http")
        embeddings = std::make_unique<consistency::HttpEmbeddingProvider>(cfg.embedding.base_url,
                                                                          cfg.embedding.api_key_env, cfg.embedding.dim);
    else
        embeddings = std::make_unique<consistency::HashingEmbeddingProvider>(cfg.embedding.dim);
    std::unique_ptr<corpus::TranslationProvider> translator;
    if (cfg.translation.kind == "echo") translator = std::make_unique<corpus::EchoTranslationProvider>();
    if (cfg.translation.kind == "http")
        translator = std::make_unique<corpus::HttpTranslationProvider>(cfg.translation.base_url, cfg.translation.api_key_env);
    const consistency::TrigramLanguageIdentifier identifier;

    std::map<std::string, reporting::DatasetAggregates> by_dataset;
    Table means{"consistency_means", {"language", "temperature", "questions"}, {}};
    for (const auto& m : consistency::metric_names()) means.header.push_back(m);
    std::size_t failures = 0;
    for (const auto& lang : cfg.languages) {
        consistency::ConsistencyOptions opts;
        opts.model = cfg.answer_model;
        opts.language = lang;
        opts.temperatures = cfg.temperatures;
        opts.k = cfg.samples;
        opts.workers = cfg.workers;
        opts.topics.lda20.seed = cfg.seeds.at("gibbs");
        opts.topics.lda100.seed = cfg.seeds.at("gibbs");
        opts.topics.hdp.seed = cfg.seeds.at("gibbs");
        opts.topics.remove_stopwords = cfg.remove_stopwords;
        const auto run = consistency::evaluate_consistency(
            data.at(lang), opts, {*gw.gateway, *embeddings, identifier, translator.get()});
        fs::create_directories(dir / lang);
        write_file(dir / lang / "scores.csv", consistency::scores_csv(run.scores));
        std::string fail_lines;
        for (const auto& f : run.failures) {
            fail_lines += nlohmann::json{{"question_id", f.question_id}, {"temperature", f.temperature}, {"reason", f.reason}}.dump() + "\n";
            ctx.err << "warning: " << lang << " " << f.question_id << " at " << f.temperature << ": " << f.reason << "\n";
        }
        write_file(dir / lang / "failures.jsonl", fail_lines);
        failures += run.failures.size();
        if (run.scores.empty()) continue;
        const auto aggregates = consistency::aggregate_scores(run.scores);
        const auto dataset = std::string(corpus::to_string(data.at(lang).front().dataset));
        auto& slot = by_dataset[dataset];
        slot.dataset = dataset;
        slot.aggregates.insert(slot.aggregates.end(), aggregates.begin(), aggregates.end());
        for (const auto& a : aggregates) {
            std::vector<std::string> row{a.language, fmt::format("{:.2f}", a.temperature), std::to_string(a.questions)};
            for (const auto& m : consistency::metric_names()) row.push_back(fmt::format("{:.4f}", a.means.at(m)));
            means.rows.push_back(std::move(row));
        }
    }
    std::vector<Table> tables{means};
    std::vector<reporting::DatasetAggregates> grouped;
    for (auto& [_, g] : by_dataset) grouped.push_back(g);
    if (std::find(cfg.languages.begin(), cfg.languages.end(), "en") != cfg.languages.end() && !grouped.empty()) {
        for (double tau : cfg.temperatures) {
            try {
                tables.push_back(reporting::consistency_table(grouped, tau, cfg.languages));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::IncompleteRun) throw;
                ctx.err << "warning: " << e.what() << "\n";
                ++failures;
            }
        }
    }
    reporting::write_exports(dir / "tables", tables, ctx.formats, manifest);
    report_calls(ctx, *gw.gateway);
    return failures ? kIncomplete : kOk;
}

std::string tau_key(double t) { return fmt::format("{:.2f}", t); }

int consistency_stats(const Context& ctx, const std::string& metric) {
    const auto& cfg = ctx.cfg;
    const auto& names = consistency::metric_names();
    if (std::find(names.begin(), names.end(), metric) == names.end())
        throw UsageError("unknown metric '" + metric + "'; expected one of " + join(names, ", "));
    // tau -> language -> values
    std::map<std::string, std::map<std::string, std::vector<double>>> values;
    for (const auto& lang : cfg.languages) {
        const auto path = cfg.output_dir / "consistency" / lang / "scores.csv";
        if (!fs::exists(path)) throw Error(ErrorKind::IncompleteRun, "no scores for " + lang + " at " + path.string());
        for (const auto& s : consistency::parse_scores_csv(read_file(path)))
            values[tau_key(s.temperature)][lang].push_back(consistency::metric_value(s, metric));
    }
    Table anova{"stats_anova_" + metric, {"temperature", "F", "p", "stars"}, {}};
    Table tukey{"stats_tukey_" + metric, {"temperature", "group_a", "group_b", "mean_diff", "q", "p_adjusted", "stars"}, {}};
    Table ttest{"stats_ttest_" + metric, {"temperature", "language", "t", "p", "stars"}, {}};
    int status = kOk;
    for (const auto& [tau, by_lang] : values) {
        std::vector<stats::SampleGroup> groups;
        for (const auto& lang : cfg.languages) {
            auto it = by_lang.find(lang);
            if (it == by_lang.end() || it->second.size() < 2) {
                ctx.err << "warning: " << lang << " has fewer than two scores at temperature " << tau << "\n";
                status = kIncomplete;
                continue;
            }
            groups.push_back({lang, it->second});
        }
        if (groups.size() < 2) continue;
        const auto a = stats::one_way_anova(groups);
        anova.rows.push_back({tau, fmt::format("{:.2f}", a.statistic), stats::format_p(a.log10_p),
                              stats::significance_stars_log10(a.log10_p)});
        for (const auto& d : stats::tukey_hsd(groups))
            tukey.rows.push_back({tau, d.group_a, d.group_b, fmt::format("{:.4f}", d.mean_diff), fmt::format("{:.3f}", d.q),
                                  fmt::format("{:.4g}", d.p_adjusted), stats::significance_stars(d.p_adjusted)});
        auto en = std::find_if(groups.begin(), groups.end(), [](const auto& g) { return g.label == "en"; });
        if (en == groups.end()) continue;
        for (const auto& g : groups) {
            if (g.label == "en") continue;
            const auto t = stats::unpaired_t_test(*en, g);
            ttest.rows.push_back({tau, g.label, fmt::format("{:.3f}", t.statistic), stats::format_p(t.log10_p),
                                  stats::significance_stars_log10(t.log10_p)});
        }
    }
    if (anova.rows.empty()) throw Error(ErrorKind::IncompleteRun, "no temperature has two or more language groups");
    const auto manifest = manifest_from_disk(cfg, cfg.output_dir / "consistency");
    reporting::write_exports(cfg.output_dir / "consistency" / "stats", {anova, tukey, ttest}, ctx.formats, manifest);
    ctx.out << reporting::render(anova, reporting::Format::Markdown, manifest.hash());
    ctx.out << reporting::render(tukey, reporting::Format::Markdown, manifest.hash());
    if (!ttest.rows.empty()) ctx.out << reporting::render(ttest, reporting::Format::Markdown, manifest.hash());
    ctx.out << "*** p < 0.001, ** p < 0.01, * p < 0.05\n";
    return status;
}

// ---- verifiability -------------------------------------------------------

int verifiability_run(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto data = load_datasets(cfg);
    std::map<std::string, std::vector<corpus::VerifiabilityInstance>> instances;
    std::size_t planned = 0;
    for (const auto& [lang, ds] : data) {
        instances[lang] = corpus::build_verifiability_instances(ds, cfg.negatives, cfg.seeds.at("negatives"));
        planned += instances[lang].size() * cfg.temperatures.size() * cfg.repeats;
    }
    if (ctx.dry_run) return report_plan(ctx, planned);
    const auto dir = cfg.output_dir / "verifiability";
    const auto manifest = make_manifest(cfg, data, {judge_model(cfg)}, cfg.temperatures);
    write_manifest(dir, manifest);
    auto gw = make_gateway(cfg);

    std::vector<verifiability::VerifiabilityRun> runs;
    std::vector<Table> tables;
    for (const auto& lang : cfg.languages) {
        verifiability::VerifiabilityOptions opts;
        opts.judge.model = judge_model(cfg);
        opts.language = lang;
        opts.temperatures = cfg.temperatures;
        opts.repeats = cfg.repeats;
        opts.workers = cfg.workers;
        auto run = verifiability::evaluate_verifiability(instances.at(lang), *gw.gateway, opts);
        fs::create_directories(dir / lang);
        write_file(dir / lang / "outcomes.jsonl", verifiability::outcomes_jsonl(run));
        write_file(dir / lang / "report.json", verifiability::to_json(run).dump(2) + "\n");

        Table t{"verifiability_" + lang, {"temperature"}, {}};
        for (const auto& m : verifiability::report_metric_names()) t.header.push_back(m);
        for (const auto& tr : run.per_temperature) {
            std::vector<std::string> row{tau_key(tr.temperature)};
            for (const auto& m : verifiability::report_metric_names()) {
                const auto v = verifiability::report_metric(tr.report, m);
                row.push_back(v ? fmt::format("{:.4f}", *v) : "n/a");
            }
            t.rows.push_back(std::move(row));
        }
        std::vector<std::string> summary{"mean ± sd"};
        for (const auto& m : verifiability::report_metric_names()) {
            auto it = run.summary.find(m);
            summary.push_back(it == run.summary.end() ? "n/a" : verifiability::format_mean_sd(it->second));
        }
        t.rows.push_back(std::move(summary));
        tables.push_back(std::move(t));
        runs.push_back(std::move(run));
    }
    tables.insert(tables.begin(), reporting::verifiability_table(runs));
    int status = kOk;
    for (const auto& m : verifiability::report_metric_names()) {
        try {
            const auto h = reporting::verifiability_heatmap(runs, m);
            tables.push_back(reporting::heatmap_table(h));
            write_file(dir / ("heatmap_" + m + ".json"), reporting::to_json(h).dump(2) + "\n");
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::IncompleteRun) throw;
            ctx.err << "warning: " << e.what() << "\n";
            status = kIncomplete;
        }
    }
    reporting::write_exports(dir / "tables", tables, ctx.formats, manifest);
    report_calls(ctx, *gw.gateway);
    return status;
}

// ---- annotate ------------------------------------------------------------

std::vector<annotate::Batch> load_batches(const fs::path& path) {
    return annotate::batches_from(correctness::batch_set_from_json(nlohmann::json::parse(read_file(path))));
}

int annotate_report(const fs::path& batches_path, const fs::path& journal, const fs::path& out_dir,
                    const std::vector<reporting::Format>& formats, std::ostream& out) {
    const auto batches = load_batches(batches_path);
    const annotate::JudgmentStore store(journal);
    std::map<std::string, std::vector<annotate::BatchAgreement>> by_lang;
    Table t{"annotation_agreement", {"batch", "language", "tasks", "majority_matches", "correlation", "unanimity", "ties"}, {}};
    for (const auto& b : batches) {
        const auto a = annotate::correlation(b, store);
        t.rows.push_back({a.batch_id, a.language, std::to_string(a.tasks), std::to_string(a.majority_matches),
                          reporting::format_percent(a.correlation()), reporting::format_percent(a.unanimity()),
                          std::to_string(a.ties)});
        by_lang[a.language].push_back(a);
    }
    for (const auto& [lang, list] : by_lang) {
        t.rows.push_back({"average", lang, "", "", reporting::format_percent(annotate::average_correlation(list)), "", ""});
    }
    reporting::RunManifest manifest;
    const auto upstream = batches_path.parent_path() / "manifest.json";
    if (fs::exists(upstream)) manifest = reporting::RunManifest::from_json(nlohmann::json::parse(read_file(upstream)));
    reporting::write_exports(out_dir, {t}, formats, manifest);
    out << reporting::render(t, reporting::Format::Markdown, manifest.hash());
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-lingual evaluation harness for medical question answering", "crossling"};
    app.require_subcommand(1);
    Flags f;
    std::optional<int> result;

    auto common = [&](CLI::App* c, bool pipeline) {
        c->add_option("--config", f.config, "Config file")->check(CLI::ExistingFile);
        c->add_option("--lang", f.lang, "Comma-separated languages");
        c->add_option("--out", f.out, "Output directory");
        c->add_option("--format", f.formats, "Table formats: csv,md,json");
        if (pipeline) {
            c->add_option("--workers", f.workers, "Worker threads");
            c->add_option("--dataset", f.datasets, "Dataset for a language as lang=path (repeatable)");
            c->add_option("--fixture", f.fixture, "Use the mock provider with this fixture")->check(CLI::ExistingFile);
            c->add_flag("--dry-run", f.dry_run, "Print the planned provider calls and budget, then exit");
        }
    };

    auto* corr = app.add_subcommand("correctness", "Answer grading against expert answers");
    corr->require_subcommand(1);
    auto* corr_run = corr->add_subcommand("run", "Generate and grade answers");
    common(corr_run, true);
    auto* corr_agg = corr->add_subcommand("aggregate", "Label counts and comparisons against English");
    common(corr_agg, false);
    auto* corr_sample = corr->add_subcommand("sample", "Stratified sample for human annotation");
    common(corr_sample, false);
    corr_sample->add_option("--fraction", f.fraction, "Share of verdicts per label")->check(CLI::Range(0.0, 1.0));
    corr_sample->add_option("--seed", f.seed, "Sampling seed");

    auto* cons = app.add_subcommand("consistency", "Answer consistency across repeated samples");
    cons->require_subcommand(1);
    auto* cons_run = cons->add_subcommand("run", "Sample answers and score them");
    common(cons_run, true);
    cons_run->add_option("--K", f.k, "Answers per question")->check(CLI::Range(2, 1000));
    cons_run->add_option("--tau", f.tau, "Comma-separated temperatures");
    cons_run->add_option("--seed", f.seed, "Topic-model seed");
    auto* cons_stats = cons->add_subcommand("stats", "ANOVA, Tukey HSD and t-tests across languages");
    common(cons_stats, false);
    cons_stats->add_option("--metric", f.metric, "Metric column")->required();

    auto* ver = app.add_subcommand("verifiability", "Yes/no claim checking");
    ver->require_subcommand(1);
    auto* ver_run = ver->add_subcommand("run", "Judge positive and negative answers");
    common(ver_run, true);
    ver_run->add_option("--tau", f.tau, "Comma-separated temperatures");
    ver_run->add_option("--seed", f.seed, "Negative-sampling seed");

    auto* ann = app.add_subcommand("annotate", "Human annotation service");
    ann->require_subcommand(1);
    std::string batches_path, tokens_path, journal_path, host = "127.0.0.1", cors = "*", annotators;
    int port = 8080;
    auto* serve = ann->add_subcommand("serve", "Serve annotation batches over HTTP");
    serve->add_option("--batches", batches_path, "batches.json from correctness sample")->required()->check(CLI::ExistingFile);
    serve->add_option("--tokens", tokens_path, "Token table")->required()->check(CLI::ExistingFile);
    serve->add_option("--journal", journal_path, "Judgment journal")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--cors-origin", cors, "Allowed browser origin");
    auto* tokens = ann->add_subcommand("tokens", "Issue bearer tokens");
    tokens->add_option("--annotators", annotators, "Comma-separated annotator ids")->required();
    tokens->add_option("--out", tokens_path, "Token table to write")->required();
    auto* areport = ann->add_subcommand("report", "Per-batch agreement from the journal");
    areport->add_option("--batches", batches_path, "batches.json")->required()->check(CLI::ExistingFile);
    areport->add_option("--journal", journal_path, "Judgment journal")->required()->check(CLI::ExistingFile);
    areport->add_option("--out", f.out, "Output directory");
    areport->add_option("--format", f.formats, "Table formats");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (corr_run->parsed()) return correctness_run(make_context(f, nullptr, out, err));
        if (corr_agg->parsed()) return correctness_aggregate(make_context(f, nullptr, out, err));
        if (corr_sample->parsed()) return correctness_sample(make_context(f, "sampling", out, err));
        if (cons_run->parsed()) return consistency_run(make_context(f, "gibbs", out, err));
        if (cons_stats->parsed()) return consistency_stats(make_context(f, nullptr, out, err), f.metric);
        if (ver_run->parsed()) return verifiability_run(make_context(f, "negatives", out, err));
        if (tokens->parsed()) {
            const auto table = annotate::issue_tokens(parse_string_list(annotators));
            annotate::save_tokens(table, tokens_path);
            for (const auto& [tok, who] : table) out << who << " " << tok << "\n";
            return kOk;
        }
        if (serve->parsed()) {
            auto store = std::make_shared<annotate::JudgmentStore>(journal_path);
            annotate::AnnotationServer server(load_batches(batches_path), annotate::load_tokens(tokens_path), store, cors);
            spdlog::info("serving annotation batches on {}:{}", host, port);
            server.run(host, port);
            return kOk;
        }
        if (areport->parsed()) {
            std::vector<reporting::Format> formats;
            for (const auto& name : parse_string_list(f.formats)) formats.push_back(reporting::parse_format(name));
            const fs::path dir = f.out.empty() ? fs::path(batches_path).parent_path() / "report" : fs::path(f.out);
            return annotate_report(batches_path, journal_path, dir, formats, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::ConfigError:
            case ErrorKind::InvalidArgument: return kUsage;
            case ErrorKind::IncompleteRun:
            case ErrorKind::IncompleteBatch: return kIncomplete;
            default: return kFailure;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    (void)result;
    return kUsage;
}

}  // namespace crossling::cli
