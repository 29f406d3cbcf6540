#include "crossling/topics/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/common/random.hpp"
#include "crossling/consistency/segmentation.hpp"

namespace crossling::topics {

namespace {

using Ids = std::vector<std::uint32_t>;

std::vector<Ids> encode(const Corpus& corpus, const Vocabulary& vocab) {
    std::vector<Ids> docs;
    docs.reserve(corpus.size());
    for (const auto& doc : corpus) {
        Ids ids;
        ids.reserve(doc.size());
        for (const auto& w : doc) ids.push_back(vocab.index.at(w));
        docs.push_back(std::move(ids));
    }
    return docs;
}

void require_tokens(const Corpus& corpus) {
    const bool any = std::any_of(corpus.begin(), corpus.end(), [](const Document& d) { return !d.empty(); });
    if (!any) throw Error(ErrorKind::EmptyCorpus, "no document contains a token");
}

std::size_t sample_discrete(Rng& rng, const std::vector<double>& weights, double total) {
    double u = rng.uniform() * total;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        u -= weights[k];
        if (u < 0.0) return k;
    }
    // rounding left u marginally positive; fall back to the last positive weight
    for (std::size_t k = weights.size(); k-- > 0;)
        if (weights[k] > 0.0) return k;
    return 0;
}

// theta_k proportional to prior_k + sum_i r_ik, r_ik proportional to phi_k(w_i) theta_k
TopicDistribution fixed_point(const std::vector<std::vector<double>>& phi, const std::vector<double>& prior,
                              const Vocabulary& vocab, const Document& doc) {
    const std::size_t k_count = phi.size();
    Ids ids;
    for (const auto& w : doc) {
        auto it = vocab.index.find(w);
        if (it != vocab.index.end()) ids.push_back(it->second);
    }
    TopicDistribution theta(k_count, 1.0 / static_cast<double>(k_count));
    if (ids.empty()) return theta;

    const double prior_total = std::accumulate(prior.begin(), prior.end(), 0.0);
    const double denom = static_cast<double>(ids.size()) + prior_total;
    std::vector<double> acc(k_count), r(k_count);
    for (int iter = 0; iter < 500; ++iter) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (auto w : ids) {
            double s = 0.0;
            for (std::size_t k = 0; k < k_count; ++k) s += r[k] = phi[k][w] * theta[k];
            if (s <= 0.0) continue;
            for (std::size_t k = 0; k < k_count; ++k) acc[k] += r[k] / s;
        }
        double change = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            const double next = (prior[k] + acc[k]) / denom;
            change = std::max(change, std::abs(next - theta[k]));
            theta[k] = next;
        }
        if (change < 1e-12) break;
    }
    const double total = std::accumulate(theta.begin(), theta.end(), 0.0);
    for (auto& t : theta) t /= total;
    return theta;
}

std::vector<double> smoothed_row(const std::uint32_t* counts, std::size_t v, std::uint64_t total, double smooth) {
    std::vector<double> row(v);
    const double denom = static_cast<double>(total) + static_cast<double>(v) * smooth;
    for (std::size_t w = 0; w < v; ++w) row[w] = (counts[w] + smooth) / denom;
    return row;
}

nlohmann::json vocab_json(const Vocabulary& v) { return v.words; }

Vocabulary vocab_from_json(const nlohmann::json& j) {
    Vocabulary v;
    v.words = j.get<std::vector<std::string>>();
    for (std::uint32_t i = 0; i < v.words.size(); ++i) v.index.emplace(v.words[i], i);
    return v;
}

}  // namespace

Document prepare_document(std::string_view text) {
    return consistency::fold_case(consistency::tokenize(text));
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
    Vocabulary v;
    for (const auto& doc : corpus)
        for (const auto& w : doc)
            if (v.index.emplace(w, static_cast<std::uint32_t>(v.words.size())).second) v.words.push_back(w);
    return v;
}

std::vector<double> LdaModel::topic_word_distribution(std::size_t k) const {
    return smoothed_row(topic_word.data() + k * vocab.size(), vocab.size(), topic_totals.at(k), beta);
}

std::vector<double> HdpModel::topic_word_distribution(std::size_t k) const {
    return smoothed_row(topic_word.at(k).data(), vocab.size(), topic_totals.at(k), eta);
}

LdaModel fit_lda(const Corpus& corpus, const LdaOptions& options) {
    require_tokens(corpus);
    if (options.n_topics == 0) throw Error(ErrorKind::InvalidArgument, "n_topics must be positive");

    LdaModel m;
    m.n_topics = options.n_topics;
    m.alpha = options.alpha > 0.0 ? options.alpha : 50.0 / static_cast<double>(options.n_topics);
    m.beta = options.beta;
    m.iterations = options.iterations;
    m.seed = options.seed;
    m.vocab = Vocabulary::build(corpus);

    const std::size_t k_count = m.n_topics;
    const std::size_t v = m.vocab.size();
    const double v_beta = static_cast<double>(v) * m.beta;
    const auto docs = encode(corpus, m.vocab);

    Rng rng(options.seed);
    m.topic_word.assign(k_count * v, 0);
    m.topic_totals.assign(k_count, 0);
    std::vector<std::vector<std::uint32_t>> doc_topic(docs.size(), std::vector<std::uint32_t>(k_count, 0));
    std::vector<Ids> z(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        z[d].resize(docs[d].size());
        for (std::size_t i = 0; i < docs[d].size(); ++i) {
            const auto k = static_cast<std::uint32_t>(rng.uniform_index(k_count));
            z[d][i] = k;
            ++doc_topic[d][k];
            ++m.topic_word[k * v + docs[d][i]];
            ++m.topic_totals[k];
        }
    }

    auto perplexity = [&] {
        double log_lik = 0.0;
        std::size_t n = 0;
        const double k_alpha = static_cast<double>(k_count) * m.alpha;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const double nd = static_cast<double>(docs[d].size());
            for (auto w : docs[d]) {
                double p = 0.0;
                for (std::size_t k = 0; k < k_count; ++k)
                    p += (doc_topic[d][k] + m.alpha) / (nd + k_alpha) * (m.topic_word[k * v + w] + m.beta) /
                         (static_cast<double>(m.topic_totals[k]) + v_beta);
                log_lik += std::log(p);
                ++n;
            }
        }
        return std::exp(-log_lik / static_cast<double>(n));
    };

    std::vector<double> p(k_count);
    for (std::size_t iter = 1; iter <= options.iterations; ++iter) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            auto& nd = doc_topic[d];
            for (std::size_t i = 0; i < docs[d].size(); ++i) {
                const auto w = docs[d][i];
                auto k_old = z[d][i];
                --nd[k_old];
                --m.topic_word[k_old * v + w];
                --m.topic_totals[k_old];
                double total = 0.0;
                for (std::size_t k = 0; k < k_count; ++k) {
                    p[k] = (nd[k] + m.alpha) * (m.topic_word[k * v + w] + m.beta) /
                           (static_cast<double>(m.topic_totals[k]) + v_beta);
                    total += p[k];
                }
                const auto k_new = static_cast<std::uint32_t>(sample_discrete(rng, p, total));
                z[d][i] = k_new;
                ++nd[k_new];
                ++m.topic_word[k_new * v + w];
                ++m.topic_totals[k_new];
            }
        }
        if (options.log_every > 0 && (iter % options.log_every == 0 || iter == options.iterations)) {
            const double pp = perplexity();
            m.perplexity_trace.emplace_back(iter, pp);
            spdlog::debug("lda k={} iter={} perplexity={:.3f}", k_count, iter, pp);
        }
    }
    return m;
}

HdpModel fit_hdp(const Corpus& corpus, const HdpOptions& options) {
    require_tokens(corpus);
    if (options.truncation < 2) throw Error(ErrorKind::InvalidArgument, "truncation must be at least 2");

    HdpModel m;
    m.gamma = options.gamma;
    m.alpha0 = options.alpha0;
    m.eta = options.eta;
    m.truncation = options.truncation;
    m.iterations = options.iterations;
    m.seed = options.seed;
    m.vocab = Vocabulary::build(corpus);

    const std::size_t t = options.truncation;
    const std::size_t v = m.vocab.size();
    const double v_eta = static_cast<double>(v) * m.eta;
    const auto docs = encode(corpus, m.vocab);

    Rng rng(options.seed);
    // prior draw of the truncated stick; a flat start spawns one topic per document
    std::vector<double> weights(t);
    {
        double remaining = 1.0;
        for (std::size_t k = 0; k < t; ++k) {
            const double stick = k + 1 == t ? 1.0 : rng.beta(1.0, m.gamma);
            weights[k] = std::max(remaining * stick, 1e-300);
            remaining *= 1.0 - stick;
        }
    }
    std::vector<std::uint32_t> nkw(t * v, 0);
    std::vector<std::uint64_t> nk(t, 0);
    std::vector<std::vector<std::uint32_t>> ndk(docs.size(), std::vector<std::uint32_t>(t, 0));
    std::vector<Ids> z(docs.size());
    std::vector<double> p(t);

    auto resample_token = [&](std::size_t d, std::size_t i) {
        const auto w = docs[d][i];
        double total = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            p[k] = (ndk[d][k] + m.alpha0 * weights[k]) * (nkw[k * v + w] + m.eta) /
                   (static_cast<double>(nk[k]) + v_eta);
            total += p[k];
        }
        const auto k = static_cast<std::uint32_t>(sample_discrete(rng, p, total));
        z[d][i] = k;
        ++ndk[d][k];
        ++nkw[k * v + w];
        ++nk[k];
    };

    // sequential initialization: each token conditioned on those before it
    for (std::size_t d = 0; d < docs.size(); ++d) {
        z[d].resize(docs[d].size());
        for (std::size_t i = 0; i < docs[d].size(); ++i) resample_token(d, i);
    }

    std::vector<double> tables(t);
    for (std::size_t iter = 1; iter <= options.iterations; ++iter) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t i = 0; i < docs[d].size(); ++i) {
                const auto k_old = z[d][i];
                --ndk[d][k_old];
                --nkw[k_old * v + docs[d][i]];
                --nk[k_old];
                resample_token(d, i);
            }
        }
        // table counts (Antoniak), then the truncated stick
        std::fill(tables.begin(), tables.end(), 0.0);
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t k = 0; k < t; ++k) {
                const std::uint32_t n = ndk[d][k];
                if (n == 0) continue;
                const double a = m.alpha0 * weights[k];
                double tables_dk = 1.0;
                for (std::uint32_t j = 1; j < n; ++j)
                    if (rng.uniform() < a / (a + j)) tables_dk += 1.0;
                tables[k] += tables_dk;
            }
        }
        double tail = std::accumulate(tables.begin(), tables.end(), 0.0);
        double remaining = 1.0;
        for (std::size_t k = 0; k < t; ++k) {
            tail -= tables[k];
            const double stick = k + 1 == t ? 1.0 : rng.beta(1.0 + tables[k], m.gamma + std::max(tail, 0.0));
            weights[k] = remaining * stick;
            remaining *= 1.0 - stick;
        }
        for (auto& w : weights) w = std::max(w, 1e-300);
        if (iter % 50 == 0 || iter == options.iterations) {
            const auto realized = std::count_if(nk.begin(), nk.end(), [](std::uint64_t c) { return c > 0; });
            spdlog::debug("hdp iter={} realized topics={}", iter, realized);
        }
    }

    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < t; ++k)
        if (nk[k] > 0) order.push_back(k);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nk[a] > nk[b]; });
    std::vector<std::uint32_t> remap(t, 0);
    double weight_total = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto k = order[r];
        remap[k] = static_cast<std::uint32_t>(r);
        m.topic_word.emplace_back(nkw.begin() + static_cast<std::ptrdiff_t>(k * v),
                                  nkw.begin() + static_cast<std::ptrdiff_t>((k + 1) * v));
        m.topic_totals.push_back(nk[k]);
        m.topic_weights.push_back(weights[k]);
        weight_total += weights[k];
    }
    for (auto& w : m.topic_weights) w /= weight_total;
    m.assignments.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d)
        for (auto k : z[d]) m.assignments[d].push_back(remap[k]);
    return m;
}

TopicDistribution infer_topic_distribution(const LdaModel& model, const Document& doc) {
    std::vector<std::vector<double>> phi;
    phi.reserve(model.n_topics);
    for (std::size_t k = 0; k < model.n_topics; ++k) phi.push_back(model.topic_word_distribution(k));
    return fixed_point(phi, std::vector<double>(model.n_topics, model.alpha), model.vocab, doc);
}

TopicDistribution infer_topic_distribution(const HdpModel& model, const Document& doc) {
    std::vector<std::vector<double>> phi;
    std::vector<double> prior;
    for (std::size_t k = 0; k < model.realized_topics(); ++k) {
        phi.push_back(model.topic_word_distribution(k));
        prior.push_back(model.alpha0 * model.topic_weights[k]);
    }
    return fixed_point(phi, prior, model.vocab, doc);
}

double topic_similarity(const TopicDistribution& a, const TopicDistribution& b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::DimensionMismatch,
                    "topic vectors of size " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::ZeroVector, "topic vector has zero norm");
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

nlohmann::json to_json(const LdaModel& m) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [iter, pp] : m.perplexity_trace) trace.push_back({iter, pp});
    return {{"kind", "lda"},     {"format_version", 1},     {"n_topics", m.n_topics},
            {"alpha", m.alpha},  {"beta", m.beta},          {"iterations", m.iterations},
            {"seed", m.seed},    {"vocab", vocab_json(m.vocab)}, {"topic_word", m.topic_word},
            {"topic_totals", m.topic_totals}, {"perplexity_trace", trace}};
}

LdaModel lda_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind") != "lda") throw Error(ErrorKind::ParseError, "not an LDA model");
        LdaModel m;
        m.n_topics = j.at("n_topics").get<std::size_t>();
        m.alpha = j.at("alpha").get<double>();
        m.beta = j.at("beta").get<double>();
        m.iterations = j.at("iterations").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.vocab = vocab_from_json(j.at("vocab"));
        m.topic_word = j.at("topic_word").get<std::vector<std::uint32_t>>();
        m.topic_totals = j.at("topic_totals").get<std::vector<std::uint64_t>>();
        for (const auto& e : j.value("perplexity_trace", nlohmann::json::array()))
            m.perplexity_trace.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<double>());
        if (m.topic_word.size() != m.n_topics * m.vocab.size() || m.topic_totals.size() != m.n_topics)
            throw Error(ErrorKind::ParseError, "LDA count arrays do not match n_topics x vocabulary");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("LDA model: ") + e.what());
    }
}

nlohmann::json to_json(const HdpModel& m) {
    return {{"kind", "hdp"},          {"format_version", 1},        {"gamma", m.gamma},
            {"alpha0", m.alpha0},     {"eta", m.eta},               {"truncation", m.truncation},
            {"iterations", m.iterations}, {"seed", m.seed},         {"vocab", vocab_json(m.vocab)},
            {"topic_word", m.topic_word}, {"topic_totals", m.topic_totals},
            {"topic_weights", m.topic_weights}, {"assignments", m.assignments}};
}

HdpModel hdp_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind") != "hdp") throw Error(ErrorKind::ParseError, "not an HDP model");
        HdpModel m;
        m.gamma = j.at("gamma").get<double>();
        m.alpha0 = j.at("alpha0").get<double>();
        m.eta = j.at("eta").get<double>();
        m.truncation = j.at("truncation").get<std::size_t>();
        m.iterations = j.at("iterations").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.vocab = vocab_from_json(j.at("vocab"));
        m.topic_word = j.at("topic_word").get<std::vector<std::vector<std::uint32_t>>>();
        m.topic_totals = j.at("topic_totals").get<std::vector<std::uint64_t>>();
        m.topic_weights = j.at("topic_weights").get<std::vector<double>>();
        m.assignments = j.value("assignments", std::vector<std::vector<std::uint32_t>>{});
        if (m.topic_totals.size() != m.topic_word.size() || m.topic_weights.size() != m.topic_word.size())
            throw Error(ErrorKind::ParseError, "HDP topic arrays differ in length");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("HDP model: ") + e.what());
    }
}

}  // namespace crossling::topics
