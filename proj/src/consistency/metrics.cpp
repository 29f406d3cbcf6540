#include "crossling/consistency/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "crossling/common/error.hpp"
#include "crossling/consistency/segmentation.hpp"

namespace crossling::consistency {

namespace {

using NgramSet = std::vector<std::string>;  // sorted, unique

NgramSet ngram_set(const std::vector<std::string>& tokens, std::size_t n) {
    NgramSet out;
    if (n == 0 || tokens.size() < n) return out;
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            g += '\x1f';
            g += tokens[i + j];
        }
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double jaccard(const NgramSet& a, const NgramSet& b, EmptySetPolicy policy) {
    if (a.empty() || b.empty()) {
        if (policy == EmptySetPolicy::Throw) throw Error(ErrorKind::DegenerateInput, "empty n-gram set");
        return a.empty() && b.empty() ? 1.0 : 0.0;
    }
    std::size_t common = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::vector<double> row_norms(const TokenMatrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (float x : m.row(i)) s += static_cast<double>(x) * x;
        out[i] = std::sqrt(s);
        if (out[i] == 0.0) throw Error(ErrorKind::ZeroVector, fmt::format("token vector {} is zero", i));
    }
    return out;
}

void check_shapes(const TokenMatrix& a, const TokenMatrix& b) {
    if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorKind::EmptyTokens, "bertscore needs tokens on both sides");
    if (a.dim != b.dim) throw Error(ErrorKind::DimensionMismatch, fmt::format("dims {} and {}", a.dim, b.dim));
}

BertScore finish(double p, double r) {
    BertScore s{p, r, 0.0};
    // the harmonic mean only makes sense for two positive terms
    s.f1 = (p > 0.0 && r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
    return s;
}

double set_pairwise_mean(const std::vector<NgramSet>& sets) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            sum += jaccard(sets[i], sets[j], EmptySetPolicy::Define);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

}  // namespace

void throw_too_few(std::size_t n) {
    throw Error(ErrorKind::TooFewAnswers, fmt::format("pairwise metrics need at least 2 answers, got {}", n));
}

double ngram_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t n,
                        EmptySetPolicy policy) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "n-gram order must be positive");
    return jaccard(ngram_set(a, n), ngram_set(b, n), policy);
}

double ngram_similarity(std::string_view a, std::string_view b, std::size_t n, EmptySetPolicy policy) {
    return ngram_similarity(fold_case(tokenize(a)), fold_case(tokenize(b)), n, policy);
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, fmt::format("dims {} and {}", a.size(), b.size()));
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::ZeroVector, "cosine of a zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

BertScore bertscore_from_cosines(const std::vector<std::vector<double>>& cos) {
    if (cos.empty() || cos.front().empty()) throw Error(ErrorKind::EmptyTokens, "empty cosine matrix");
    const std::size_t m = cos.front().size();
    std::vector<double> col_max(m, -1.0);
    double recall = 0.0;
    for (const auto& row : cos) {
        if (row.size() != m) throw Error(ErrorKind::DimensionMismatch, "ragged cosine matrix");
        double best = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            best = std::max(best, row[j]);
            col_max[j] = std::max(col_max[j], row[j]);
        }
        recall += best;
    }
    double precision = 0.0;
    for (double c : col_max) precision += c;
    return finish(precision / static_cast<double>(m), recall / static_cast<double>(cos.size()));
}

BertScore bertscore_serial(const TokenMatrix& a, const TokenMatrix& b) {
    check_shapes(a, b);
    std::vector<std::vector<double>> cos(a.rows(), std::vector<double>(b.rows()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) cos[i][j] = cosine(a.row(i), b.row(j));
    }
    return bertscore_from_cosines(cos);
}

BertScore bertscore(const TokenMatrix& a, const TokenMatrix& b) {
    check_shapes(a, b);
    const auto na = row_norms(a);
    const auto nb = row_norms(b);
    const auto n = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t m = b.rows();
    const std::size_t dim = a.dim;
    std::vector<double> row_max(a.rows(), -1.0);
    std::vector<double> cos(a.rows() * m);

#pragma omp parallel for schedule(static) if (a.rows() * m * dim > 32768)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const float* ra = a.data.data() + static_cast<std::size_t>(i) * dim;
        double best = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            const float* rb = b.data.data() + j * dim;
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += static_cast<double>(ra[k]) * rb[k];
            const double c = std::clamp(dot / (na[static_cast<std::size_t>(i)] * nb[j]), -1.0, 1.0);
            cos[static_cast<std::size_t>(i) * m + j] = c;
            best = std::max(best, c);
        }
        row_max[static_cast<std::size_t>(i)] = best;
    }

    double precision = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double best = -1.0;
        for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, cos[i * m + j]);
        precision += best;
    }
    double recall = 0.0;
    for (double r : row_max) recall += r;
    return finish(precision / static_cast<double>(m), recall / static_cast<double>(a.rows()));
}

std::vector<double> batch_pairwise_ngram_serial(const std::vector<std::vector<std::vector<std::string>>>& token_sets,
                                                std::size_t n) {
    std::vector<double> out;
    out.reserve(token_sets.size());
    for (const auto& answers : token_sets) {
        if (answers.size() < 2) throw_too_few(answers.size());
        std::vector<NgramSet> sets;
        for (const auto& t : answers) sets.push_back(ngram_set(t, n));
        out.push_back(set_pairwise_mean(sets));
    }
    return out;
}

std::vector<double> batch_pairwise_ngram(const std::vector<std::vector<std::vector<std::string>>>& token_sets,
                                         std::size_t n) {
    for (const auto& answers : token_sets) {
        if (answers.size() < 2) throw_too_few(answers.size());
    }
    std::vector<double> out(token_sets.size());
    const auto count = static_cast<std::ptrdiff_t>(token_sets.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t q = 0; q < count; ++q) {
        const auto& answers = token_sets[static_cast<std::size_t>(q)];
        std::vector<NgramSet> sets;
        sets.reserve(answers.size());
        for (const auto& t : answers) sets.push_back(ngram_set(t, n));
        out[static_cast<std::size_t>(q)] = set_pairwise_mean(sets);
    }
    return out;
}

}  // namespace crossling::consistency
