// One line per acceptance criterion; exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "crossling/annotate/judgments.hpp"
#include "crossling/cli/app.hpp"
#include "crossling/common/random.hpp"
#include "crossling/common/text.hpp"
#include "crossling/consistency/metrics.hpp"
#include "crossling/prompting/parsers.hpp"
#include "crossling/reporting/reporting.hpp"
#include "crossling/stats/distributions.hpp"
#include "crossling/stats/tests.hpp"
#include "crossling/topics/topics.hpp"
#include "crossling/verifiability/verifiability.hpp"
#include "e2e_workspace.hpp"

using namespace crossling;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Check {
    std::vector<std::string> problems;
    std::string summary;

    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        if (!(std::fabs(got - want) <= tol)) problems.push_back(fmt::format("{}: got {:.6f}, want {:.6f}", what, got, want));
    }
};

json load_fixture(const std::string& rel) {
    std::ifstream in(std::string(CROSSLING_FIXTURE_DIR) + "/" + rel);
    if (!in) throw std::runtime_error("missing fixture " + rel);
    return json::parse(in);
}

// ---------------------------------------------------------------------------

void report_arithmetic(Check& c) {
    const auto f = load_fixture("reporting/correctness_counts.json");
    const auto& counts = f.at("gpt-3.5-turbo");
    // label order: more, less, neither, contradictory
    auto column = [&](const std::string& ds, const std::string& lang) { return counts.at(ds).at(lang).get<std::vector<std::size_t>>(); };
    const std::map<std::string, std::size_t> sizes{{"HealthQA", 1134}, {"LiveQA", 246}, {"MedicationQA", 690}};
    for (const auto& [ds, size] : sizes) {
        const auto en = column(ds, "en");
        c.expect(std::accumulate(en.begin(), en.end(), std::size_t{0}) == size, ds + " English column does not sum to the dataset size");
    }
    const std::vector<std::tuple<std::string, std::string, double>> decreases{
        {"HealthQA", "hi", 38.62}, {"HealthQA", "zh", 11.90}, {"HealthQA", "es", 10.76},
        {"LiveQA", "hi", 34.15},   {"LiveQA", "zh", 5.69},    {"LiveQA", "es", 5.28},
        {"MedicationQA", "hi", 30.58}, {"MedicationQA", "zh", 15.80}, {"MedicationQA", "es", 10.29},
    };
    for (const auto& [ds, lang, want] : decreases)
        c.near(reporting::relative_decrease(column(ds, lang)[0], column(ds, "en")[0], sizes.at(ds)), want, 0.01,
               "decrease " + ds + "/" + lang);
    const std::vector<std::tuple<std::string, std::string, double>> multipliers{
        {"HealthQA", "hi", 15.67}, {"HealthQA", "zh", 4.67}, {"HealthQA", "es", 1.67}, {"LiveQA", "hi", 4.33},
        {"MedicationQA", "hi", 10.2}, {"MedicationQA", "zh", 9.6}, {"MedicationQA", "es", 4.6},
    };
    for (const auto& [ds, lang, want] : multipliers)
        c.near(reporting::contradiction_multiplier(column(ds, lang)[3], column(ds, "en")[3]), want, 0.005,
               "multiplier " + ds + "/" + lang);
    const auto& med = f.at("medalpaca_healthqa_more");
    const std::map<std::string, double> baseline{{"es", 92.23}, {"zh", 97.93}, {"hi", 93.26}};
    for (const auto& [lang, want] : baseline)
        c.near(reporting::english_baseline_decrease(med.at(lang), med.at("en")), want, 0.01, "baseline decrease " + lang);
    c.summary = fmt::format("{} decreases, {} multipliers, {} baseline decreases", decreases.size(), multipliers.size(),
                            baseline.size());
}

void percent_drops(Check& c) {
    const auto f = load_fixture("reporting/consistency_drops.json");
    std::size_t cells = 0, exact_text = 0;
    for (const auto& t : f.at("tables")) {
        const auto& en = t.at("rows").at("en");
        for (const auto& [lang, row] : t.at("rows").items()) {
            for (const auto& [metric, cell] : row.items()) {
                const double v = cell.at("value");
                const double base = en.at(metric).at("value");
                const auto printed = cell.at("drop").get<std::string>();
                const double want = std::stod(printed.substr(0, printed.size() - 1));
                c.near(reporting::percent_drop(v, base), want, 0.1,
                       fmt::format("{} {} {} {}", t.at("model").get<std::string>(), t.at("dataset").get<std::string>(), lang, metric));
                exact_text += reporting::format_percent_drop(v, base) == printed;
                ++cells;
            }
        }
    }
    c.expect(reporting::format_percent_drop(0.9415, 0.9706) == "-3.0%", "sim_sent LiveQA hi is not -3.0%");
    c.expect(reporting::format_percent_drop(0.1715, 0.3476) == "-50.7%", "sim_2gram HealthQA hi is not -50.7%");
    c.summary = fmt::format("{} cells within 0.1 pp, {} identical as text", cells, exact_text);
}

void correlation_averages(Check& c) {
    using namespace crossling::annotate;
    using L = prompting::CorrectnessLabel;
    const auto f = load_fixture("annotate/batch_agreement.json");
    std::vector<std::string> parts;
    for (const auto& [lang, spec] : f.at("languages").items()) {
        JudgmentStore store;
        std::vector<BatchAgreement> results;
        const auto annotators = spec.at("annotators").get<std::size_t>();
        std::size_t b = 0;
        for (const auto& bs : spec.at("batches")) {
            Batch batch{lang + "-" + std::to_string(++b), lang, {}};
            const auto n = bs.at("tasks").get<std::size_t>();
            const auto matches = bs.at("matches").get<std::size_t>();
            for (std::size_t t = 1; t <= n; ++t)
                batch.tasks.push_back({batch.batch_id + "/" + std::to_string(t), batch.batch_id, lang, "q", "gt", "a", "r",
                                       L::MoreComprehensiveAppropriate});
            for (std::size_t t = 0; t < n; ++t) {
                for (std::size_t a = 0; a < annotators; ++a) {
                    Judgment j{batch.tasks[t].task_id, "ann" + std::to_string(a), true, "", std::nullopt};
                    if (t >= matches) {
                        j.agrees = false;
                        j.disagreement_reason = "less detail than the reference";
                        j.corrected_label = L::LessComprehensiveAppropriate;
                    }
                    store.append(j);
                }
            }
            results.push_back(correlation(batch, store));
        }
        const double avg = average_correlation(results);
        c.near(avg, spec.at("expected").get<double>(), 0.01, "average correlation " + lang);
        parts.push_back(fmt::format("{} {:.2f}", lang, avg));
    }
    c.summary = join(parts, ", ");
}

void auc_identity(Check& c) {
    Rng rng(20240615);
    std::size_t brute = 0;
    for (int fixture = 0; fixture < 1000; ++fixture) {
        const std::size_t n = 2 + rng.uniform_index(399);
        std::vector<verifiability::VerifiabilityOutcome> outcomes(n);
        for (auto& o : outcomes) {
            o.truth = rng.uniform() < 0.3 + 0.4 * rng.uniform();
            o.predicted = rng.uniform() < (o.truth ? 0.8 : 0.25);
        }
        outcomes[0].truth = true;
        outcomes[1].truth = false;
        const auto r = verifiability::classification_metrics(outcomes);
        // integer doubled Mann-Whitney U from average ranks of binary scores
        std::int64_t P = 0, N = 0, m0 = 0, m1 = 0;
        for (const auto& o : outcomes) {
            (o.truth ? P : N) += 1;
            (o.predicted ? m1 : m0) += 1;
        }
        const auto tp = static_cast<std::int64_t>(r.tp), fn = static_cast<std::int64_t>(r.fn);
        const auto tn = static_cast<std::int64_t>(r.tn);
        const std::int64_t doubled_rank_sum = fn * (m0 + 1) + tp * (2 * m0 + m1 + 1);
        const std::int64_t doubled_u = doubled_rank_sum - P * (P + 1);
        // AUC = 2U / 2PN and R_macro = (TP*N + TN*P) / 2PN
        c.expect(doubled_u == tp * N + tn * P, fmt::format("fixture {}: 2U {} vs {}", fixture, doubled_u, tp * N + tn * P));
        c.expect(r.auc.has_value() && std::fabs(*r.auc - r.recall_macro) < 1e-12, fmt::format("fixture {}: AUC != R_macro", fixture));

        std::vector<double> scores;
        std::vector<bool> truth;
        for (const auto& o : outcomes) {
            scores.push_back(o.predicted ? 1.0 : 0.0);
            truth.push_back(o.truth);
        }
        if (n <= 200) {
            c.expect(verifiability::rank_auc(scores, truth) == verifiability::pairwise_auc(scores, truth),
                     fmt::format("fixture {}: rank and pairwise AUC differ", fixture));
            // graded scores with ties too
            for (auto& s : scores) s = static_cast<double>(rng.uniform_index(7));
            c.expect(std::fabs(verifiability::rank_auc(scores, truth) - verifiability::pairwise_auc(scores, truth)) < 1e-12,
                     fmt::format("fixture {}: graded rank and pairwise AUC differ", fixture));
            ++brute;
        }
    }
    c.summary = fmt::format("1000 fixtures exact, {} brute-force comparisons", brute);
}

double monte_carlo_range_cdf(double q, int k, int df, int draws, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::chi_squared_distribution<double> chi2(df);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < k; ++j) {
            const double z = normal(rng);
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
        if ((hi - lo) / std::sqrt(chi2(rng) / df) <= q) ++hits;
    }
    return static_cast<double>(hits) / draws;
}

void stats_kernel(Check& c) {
    using namespace crossling::stats;
    const auto a = one_way_anova({{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {3, 4, 5}}});
    c.expect(a.statistic == 3.0, fmt::format("F = {:.17g}, not exactly 3", a.statistic));
    c.near(a.p_value, 0.125, 1e-9, "ANOVA p");

    Rng rng(99);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        SampleGroup g1{"x", {}}, g2{"y", {}};
        const auto n1 = 2 + rng.uniform_index(20), n2 = 2 + rng.uniform_index(20);
        for (std::size_t j = 0; j < n1; ++j) g1.values.push_back(rng.normal());
        for (std::size_t j = 0; j < n2; ++j) g2.values.push_back(rng.normal() + 0.5 * rng.uniform());
        const double f = one_way_anova({g1, g2}).statistic;
        const double t = unpaired_t_test(g1, g2).statistic;
        worst = std::max(worst, std::fabs(f - t * t) / std::max(1.0, f));
    }
    c.expect(worst <= 1e-9, fmt::format("F vs t^2 differ by {:.3g}", worst));

    const double cdf = studentized_range_cdf(3.88, 3, 10);
    c.expect(cdf >= 0.945 && cdf <= 0.955, fmt::format("studentized range cdf {:.5f}", cdf));
    const double mc = monte_carlo_range_cdf(3.88, 3, 10, 400000, 5);
    c.near(cdf, mc, 0.004, "studentized range vs Monte Carlo");

    const auto same = unpaired_t_test({"a", {1, 2, 3}}, {"b", {1, 2, 3}});
    c.expect(same.statistic == 0.0 && same.p_value == 1.0, "t-test on identical groups is not t=0, p=1");
    const std::vector<int> r1{1, 1, 2, 2}, r2{1, 2, 1, 2};
    c.expect(cohens_kappa(r1, r1) == 1.0, "kappa of identical raters is not 1");
    c.expect(cohens_kappa(r1, r2) == 0.0, "kappa at chance agreement is not 0");
    c.summary = fmt::format("F=3 p={:.9f}, max |F-t^2| {:.1e}, Q cdf {:.4f} (MC {:.4f})", a.p_value, worst, cdf, mc);
}

// Jaccard over whitespace tokens, lowercased; the inputs are ASCII words.
double brute_jaccard(const std::string& a, const std::string& b, std::size_t n) {
    auto grams = [n](const std::string& s) {
        std::vector<std::string> tok;
        std::istringstream in(s);
        for (std::string w; in >> w;) {
            std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::tolower(ch); });
            tok.push_back(w);
        }
        std::set<std::vector<std::string>> out;
        for (std::size_t i = 0; i + n <= tok.size(); ++i) out.emplace(tok.begin() + i, tok.begin() + i + n);
        return out;
    };
    const auto ga = grams(a), gb = grams(b);
    if (ga.empty() && gb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& g : ga) inter += gb.count(g);
    return static_cast<double>(inter) / static_cast<double>(ga.size() + gb.size() - inter);
}

consistency::BertScore brute_bertscore(const consistency::TokenMatrix& a, const consistency::TokenMatrix& b) {
    auto cos = [](std::span<const float> x, std::span<const float> y) {
        double d = 0, nx = 0, ny = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = x[i], v = y[i];
            d += u * v, nx += u * u, ny += v * v;
        }
        return d / std::sqrt(nx * ny);
    };
    double p = 0, r = 0;
    for (std::size_t j = 0; j < b.rows(); ++j) {
        double best = -2;
        for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, cos(a.row(i), b.row(j)));
        p += best;
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double best = -2;
        for (std::size_t j = 0; j < b.rows(); ++j) best = std::max(best, cos(a.row(i), b.row(j)));
        r += best;
    }
    p /= static_cast<double>(b.rows());
    r /= static_cast<double>(a.rows());
    return {p, r, p > 0 && r > 0 ? 2 * p * r / (p + r) : 0.0};
}

void metric_oracles(Check& c) {
    using namespace crossling::consistency;
    static const std::vector<std::string> words{"fever", "Fever", "cough", "dose", "rest", "water", "pain", "sleep", "iron", "blood"};
    Rng rng(424242);
    auto text = [&] {
        std::string s;
        const auto len = rng.uniform_index(12);
        for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + words[rng.uniform_index(words.size())];
        return s;
    };
    std::vector<std::string> texts(1000);
    for (auto& t : texts) t = text();
    std::size_t jaccard = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto& a = texts[i];
        const auto& b = texts[(i + 1) % texts.size()];
        for (std::size_t n : {1u, 2u}) {
            c.expect(ngram_similarity(a, b, n) == brute_jaccard(a, b, n), fmt::format("jaccard n={} on '{}' / '{}'", n, a, b));
            ++jaccard;
        }
    }

    auto matrix = [&](std::size_t rows, std::size_t dim) {
        TokenMatrix m{dim, std::vector<float>(rows * dim)};
        for (auto& x : m.data) x = static_cast<float>(rng.normal());
        return m;
    };
    std::size_t bert = 0;
    for (int i = 0; i < 300; ++i) {
        const auto a = matrix(1 + rng.uniform_index(20), 8), b = matrix(1 + rng.uniform_index(20), 8);
        const auto want = brute_bertscore(a, b);
        for (const auto& got : {bertscore(a, b), bertscore_serial(a, b)}) {
            c.near(got.precision, want.precision, 1e-9, "bertscore precision");
            c.near(got.recall, want.recall, 1e-9, "bertscore recall");
            c.near(got.f1, want.f1, 1e-9, "bertscore f1");
        }
        ++bert;
    }

    std::vector<int> items(10);
    std::iota(items.begin(), items.end(), 0);
    std::size_t calls = 0;
    double sum = 0.0;
    const double mean = pairwise_mean<int>(items, [&](const int& x, const int& y) {
        ++calls;
        const double v = 10.0 * x + y;
        sum += v;
        return v;
    });
    c.expect(calls == 45, fmt::format("pairwise_mean made {} metric calls", calls));
    c.expect(mean == sum / 45.0, "pairwise_mean is not the mean of 45 pairs");

    std::size_t properties = 0;
    for (int i = 0; i < 2500; ++i) {
        const auto a = text(), b = text();
        for (std::size_t n : {1u, 2u}) {
            const double ab = ngram_similarity(a, b, n), ba = ngram_similarity(b, a, n);
            c.expect(ab == ba, "ngram symmetry");
            c.expect(ab >= 0.0 && ab <= 1.0, "ngram range");
            c.expect(ngram_similarity(a, a, n) == 1.0, "ngram identity");
            properties += 3;
        }
        std::vector<float> x(16), y(16);
        for (auto& v : x) v = static_cast<float>(rng.normal());
        for (auto& v : y) v = static_cast<float>(rng.normal());
        const double xy = cosine(x, y);
        c.expect(xy == cosine(y, x), "cosine symmetry");
        c.expect(xy >= -1.0 && xy <= 1.0, "cosine range");
        c.expect(std::fabs(cosine(x, x) - 1.0) < 1e-6, "cosine identity");
        properties += 3;
        const auto ma = matrix(1 + rng.uniform_index(6), 8), mb = matrix(1 + rng.uniform_index(6), 8);
        const auto s1 = bertscore(ma, mb), s2 = bertscore(mb, ma);
        c.expect(std::fabs(s1.f1 - s2.f1) < 1e-12 && s1.precision == s2.recall, "bertscore symmetry");
        c.expect(s1.f1 >= 0.0 && s1.f1 <= 1.0 && std::fabs(s1.precision) <= 1.0 && std::fabs(s1.recall) <= 1.0, "bertscore range");
        c.expect(std::fabs(bertscore(ma, ma).f1 - 1.0) < 1e-6, "bertscore identity");
        properties += 3;
    }
    c.expect(properties >= 10000, "fewer than 10000 property cases");
    if (c.problems.size() > 20) c.problems.resize(20);
    c.summary = fmt::format("{} jaccard, {} bertscore oracle cases, 45 pairs, {} property cases", jaccard, bert, properties);
}

void topic_models(Check& c) {
    using namespace crossling::topics;
    Rng rng(2024);
    Corpus corpus;
    for (int d = 0; d < 200; ++d) {
        Document doc;
        for (int i = 0; i < 60; ++i) doc.push_back(std::string(d < 100 ? "a" : "b") + "w" + std::to_string(rng.uniform_index(50)));
        corpus.push_back(std::move(doc));
    }
    auto mass_a = [](const std::vector<double>& dist, const Vocabulary& v) {
        double m = 0.0;
        for (std::size_t w = 0; w < v.size(); ++w)
            if (v.words[w][0] == 'a') m += dist[w];
        return m;
    };
    const auto lda = fit_lda(corpus, LdaOptions{.n_topics = 2, .seed = 7});
    double worst = 1.0;
    for (std::size_t k = 0; k < 2; ++k) {
        const double a = mass_a(lda.topic_word_distribution(k), lda.vocab);
        worst = std::min(worst, std::max(a, 1.0 - a));
    }
    c.expect(worst >= 0.9, fmt::format("LDA concentration {:.3f}", worst));

    std::vector<TopicDistribution> theta;
    for (const auto& doc : corpus) theta.push_back(infer_topic_distribution(lda, doc));
    double within = 0, cross = 0;
    std::size_t nw = 0, nc = 0;
    for (std::size_t i = 0; i < theta.size(); i += 5)
        for (std::size_t j = i + 5; j < theta.size(); j += 5) {
            const double s = topic_similarity(theta[i], theta[j]);
            if ((i < 100) == (j < 100)) within += s, ++nw;
            else cross += s, ++nc;
        }
    const double gap = within / nw - cross / nc;
    c.expect(gap >= 0.3, fmt::format("within-cross similarity gap {:.3f}", gap));

    const auto hdp = fit_hdp(corpus, HdpOptions{.truncation = 50, .seed = 5});
    const auto total = std::accumulate(hdp.topic_totals.begin(), hdp.topic_totals.end(), std::uint64_t{0});
    const double top2 = hdp.realized_topics() >= 2
                            ? static_cast<double>(hdp.topic_totals[0] + hdp.topic_totals[1]) / static_cast<double>(total)
                            : 0.0;
    c.expect(hdp.realized_topics() >= 2 && hdp.realized_topics() <= 6, fmt::format("HDP realized {}", hdp.realized_topics()));
    c.expect(top2 >= 0.8, fmt::format("HDP top-2 share {:.3f}", top2));

    const auto lda2 = fit_lda(corpus, LdaOptions{.n_topics = 2, .seed = 7});
    const auto hdp2 = fit_hdp(corpus, HdpOptions{.truncation = 50, .seed = 5});
    c.expect(to_json(lda).dump() == to_json(lda2).dump(), "LDA not reproducible");
    c.expect(to_json(hdp).dump() == to_json(hdp2).dump(), "HDP not reproducible");
    c.summary = fmt::format("LDA mass {:.3f}, gap {:.3f}, HDP {} topics, top-2 {:.3f}", worst, gap, hdp.realized_topics(), top2);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
    return files;
}

void end_to_end(Check& c) {
    const auto ws = e2e::make_workspace(fs::temp_directory_path() / "crossling_acceptance_e2e", {"en", "es", "zh", "hi"});
    const auto cfg = ws.config.string();
    auto run_all = [&](const std::string& out_name, std::size_t& calls) {
        const auto out = (ws.root / out_name).string();
        const std::vector<std::vector<std::string>> commands{
            {"correctness", "run"},           {"correctness", "aggregate"},
            {"correctness", "sample"},        {"consistency", "run"},
            {"consistency", "stats", "--metric", "sim_sent"}, {"verifiability", "run"},
        };
        for (auto args : commands) {
            args.insert(args.end(), {"--config", cfg, "--out", out});
            std::ostringstream o, e;
            const int code = cli::run_cli(args, o, e);
            c.expect(code == cli::kOk, fmt::format("{} {} exited {}: {}", args[0], args[1], code, e.str()));
            const auto text = o.str();
            const auto pos = text.find("provider calls: ");
            if (pos != std::string::npos) calls += std::stoul(text.substr(pos + 16));
        }
    };
    std::size_t first = 0, second = 0;
    run_all("run1", first);
    run_all("run2", second);
    c.expect(first > 0, "first run made no provider calls");
    c.expect(second == 0, fmt::format("second run made {} provider calls", second));
    const auto a = snapshot(ws.root / "run1"), b = snapshot(ws.root / "run2");
    c.expect(a.size() == b.size(), fmt::format("{} vs {} files", a.size(), b.size()));
    std::size_t identical = 0;
    for (const auto& [path, contents] : a) {
        auto it = b.find(path);
        if (it == b.end()) c.problems.push_back(path + " missing from second run");
        else if (it->second != contents) c.problems.push_back(path + " differs");
        else ++identical;
    }
    c.summary = fmt::format("{} files byte-identical, {} calls then {}", identical, first, second);
    if (c.problems.empty()) fs::remove_all(ws.root);
}

void prompt_contracts(Check& c) {
    const auto contents = read_file(std::string(CROSSLING_FIXTURE_DIR) + "/prompting/correctness_cases.jsonl");
    std::size_t cases = 0;
    std::set<std::string> labels;
    for (auto line : split_lines(contents)) {
        if (trim(line).empty()) continue;
        const auto j = json::parse(line);
        const auto parsed = prompting::parse_correctness_label(j.at("text").get<std::string>());
        const std::string got(prompting::to_string(parsed.label));
        c.expect(got == j.at("label"), fmt::format("case {} ({}): got {}", cases + 1, j.at("note").get<std::string>(), got));
        if (j.contains("reasoning"))
            c.expect(parsed.reasoning == j.at("reasoning"), fmt::format("case {}: reasoning differs", cases + 1));
        labels.insert(j.at("label").get<std::string>());
        ++cases;
    }
    c.expect(cases == 50, fmt::format("{} cases", cases));
    c.expect(labels.size() == 5, "fixture does not cover all four options and the fallback");
    c.summary = fmt::format("{} cases over {} labels", cases, labels.size());
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"report-arithmetic", report_arithmetic}, {"percent-drop", percent_drops},   {"correlation-averages", correlation_averages},
        {"auc-identity", auc_identity},           {"stats-kernel", stats_kernel},    {"metric-oracles", metric_oracles},
        {"topic-models", topic_models},           {"e2e-determinism", end_to_end},   {"prompt-contracts", prompt_contracts},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.problems.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = c.problems.empty();
        failed += !ok;
        std::cout << (ok ? "PASS " : "FAIL ") << name << fmt::format(" ({:.1f}s)", secs);
        if (!c.summary.empty()) std::cout << ": " << c.summary;
        std::cout << "\n";
        for (const auto& p : c.problems) std::cout << "    " << p << "\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
