/// @file tests.hpp
/// @brief One-way ANOVA, Tukey HSD, unpaired t-test and Cohen's kappa.

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossling/common/error.hpp"

namespace crossling::stats {

struct SampleGroup {
    std::string label;
    std::vector<double> values;
};

struct StatResult {
    double statistic = 0.0;
    double p_value = 1.0;
    /// log10 of the p-value; stays finite when p underflows a double.
    double log10_p = 0.0;
    double df1 = 0.0;  ///< df_between for ANOVA, df for t
    double df2 = 0.0;  ///< df_within for ANOVA
    /// Within-group variance was zero while the means differed.
    bool degenerate = false;
};

struct PairwiseDecision {
    std::string group_a;
    std::string group_b;
    double mean_diff = 0.0;  ///< mean(a) - mean(b)
    double q = 0.0;
    double p_adjusted = 1.0;
    bool reject = false;
};

enum class DegeneratePolicy { Throw, ReportInfinite };

StatResult one_way_anova(const std::vector<SampleGroup>& groups,
                         DegeneratePolicy policy = DegeneratePolicy::ReportInfinite);

/// Tukey-Kramer HSD over all unordered pairs, in (i, j), i < j order.
std::vector<PairwiseDecision> tukey_hsd(const std::vector<SampleGroup>& groups, double alpha = 0.05);

enum class TTestVariant { Pooled, Welch };

StatResult unpaired_t_test(const SampleGroup& a, const SampleGroup& b,
                           TTestVariant variant = TTestVariant::Pooled);

/// Two-sided t-test of one pair using the ANOVA pooled within-group variance
/// (df = N - k). Fisher's LSD; used as the unadjusted counterpart to Tukey.
StatResult pooled_pair_t_test(const std::vector<SampleGroup>& groups, std::size_t i, std::size_t j);

/// Cohen's kappa for two raters. When chance agreement is 1, kappa is 1 if
/// the raters agree everywhere and 0 otherwise.
template <class Label>
double cohens_kappa(const std::vector<Label>& r1, const std::vector<Label>& r2) {
    if (r1.size() != r2.size()) throw Error(ErrorKind::LengthMismatch, "kappa raters differ in length");
    if (r1.empty()) throw Error(ErrorKind::EmptyInput, "kappa needs at least one item");
    const double n = static_cast<double>(r1.size());
    std::map<Label, double> m1;
    std::map<Label, double> m2;
    double agree = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        m1[r1[i]] += 1.0;
        m2[r2[i]] += 1.0;
        if (r1[i] == r2[i]) agree += 1.0;
    }
    const double p_o = agree / n;
    double p_e = 0.0;
    for (const auto& [label, count] : m1) {
        if (auto it = m2.find(label); it != m2.end()) p_e += (count / n) * (it->second / n);
    }
    if (std::fabs(1.0 - p_e) < 1e-15) return p_o == 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, "" otherwise.
std::string significance_stars(double p);
std::string significance_stars_log10(double log10_p);

/// Scientific rendering with two decimals, e.g. "2.52e-80"; works from
/// log10 so underflowed p-values still print.
std::string format_p(double log10_p);

/// "153.47 / 2.52e-80"
std::string format_stat_p(double statistic, double log10_p);

}  // namespace crossling::stats
