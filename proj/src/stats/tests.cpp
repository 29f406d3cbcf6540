#include "crossling/stats/tests.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "crossling/stats/distributions.hpp"

namespace crossling::stats {

namespace {

constexpr double kLn10 = std::numbers::ln10;

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sum_sq_dev(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc;
}

void check_groups(const std::vector<SampleGroup>& groups) {
    if (groups.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two groups");
    for (const auto& g : groups) {
        if (g.values.size() < 2) {
            throw Error(ErrorKind::InvalidArgument, "group '" + g.label + "' needs at least two values");
        }
    }
}

struct WithinSummary {
    double ms_within = 0.0;
    double df_within = 0.0;
    std::vector<double> means;
};

WithinSummary within_summary(const std::vector<SampleGroup>& groups) {
    WithinSummary s;
    double ssw = 0.0;
    std::size_t n_total = 0;
    for (const auto& g : groups) {
        const double m = mean_of(g.values);
        s.means.push_back(m);
        ssw += sum_sq_dev(g.values, m);
        n_total += g.values.size();
    }
    s.df_within = static_cast<double>(n_total - groups.size());
    s.ms_within = ssw / s.df_within;
    return s;
}

StatResult with_log_p(StatResult r, double log_p) {
    r.log10_p = log_p / kLn10;
    r.p_value = std::clamp(std::exp(log_p), 0.0, 1.0);
    return r;
}

}  // namespace

StatResult one_way_anova(const std::vector<SampleGroup>& groups, DegeneratePolicy policy) {
    check_groups(groups);
    const auto within = within_summary(groups);

    double grand_sum = 0.0;
    double n_total = 0.0;
    for (const auto& g : groups) {
        grand_sum += std::accumulate(g.values.begin(), g.values.end(), 0.0);
        n_total += static_cast<double>(g.values.size());
    }
    const double grand = grand_sum / n_total;
    double ssb = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double d = within.means[i] - grand;
        ssb += static_cast<double>(groups[i].values.size()) * d * d;
    }

    StatResult r;
    r.df1 = static_cast<double>(groups.size() - 1);
    r.df2 = within.df_within;
    const double ms_between = ssb / r.df1;

    if (within.ms_within <= 0.0) {
        if (ssb <= 0.0) throw Error(ErrorKind::DegenerateVariance, "all ANOVA values are identical");
        if (policy == DegeneratePolicy::Throw) {
            throw Error(ErrorKind::DegenerateVariance, "zero within-group variance");
        }
        r.statistic = std::numeric_limits<double>::infinity();
        r.degenerate = true;
        r.p_value = 0.0;
        r.log10_p = -std::numeric_limits<double>::infinity();
        return r;
    }

    r.statistic = ms_between / within.ms_within;
    return with_log_p(r, f_log_sf(r.statistic, r.df1, r.df2));
}

std::vector<PairwiseDecision> tukey_hsd(const std::vector<SampleGroup>& groups, double alpha) {
    check_groups(groups);
    const auto within = within_summary(groups);
    if (within.ms_within <= 0.0) throw Error(ErrorKind::DegenerateVariance, "zero within-group variance");

    const int k = static_cast<int>(groups.size());
    std::vector<PairwiseDecision> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            PairwiseDecision d;
            d.group_a = groups[i].label;
            d.group_b = groups[j].label;
            d.mean_diff = within.means[i] - within.means[j];
            const double ni = static_cast<double>(groups[i].values.size());
            const double nj = static_cast<double>(groups[j].values.size());
            const double se = std::sqrt(within.ms_within / 2.0 * (1.0 / ni + 1.0 / nj));
            d.q = std::fabs(d.mean_diff) / se;
            d.p_adjusted = std::clamp(1.0 - studentized_range_cdf(d.q, k, within.df_within), 0.0, 1.0);
            d.reject = d.p_adjusted < alpha;
            out.push_back(std::move(d));
        }
    }
    return out;
}

StatResult unpaired_t_test(const SampleGroup& a, const SampleGroup& b, TTestVariant variant) {
    if (a.values.size() < 2 || b.values.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "t-test groups need at least two values");
    }
    const double na = static_cast<double>(a.values.size());
    const double nb = static_cast<double>(b.values.size());
    const double ma = mean_of(a.values);
    const double mb = mean_of(b.values);
    const double va = sum_sq_dev(a.values, ma) / (na - 1.0);
    const double vb = sum_sq_dev(b.values, mb) / (nb - 1.0);

    StatResult r;
    double se = 0.0;
    if (variant == TTestVariant::Pooled) {
        r.df1 = na + nb - 2.0;
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df1;
        se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    } else {
        const double sa = va / na;
        const double sb = vb / nb;
        se = std::sqrt(sa + sb);
        r.df1 = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    }
    if (se <= 0.0) {
        if (ma == mb) {
            r.statistic = 0.0;
            return with_log_p(r, 0.0);
        }
        throw Error(ErrorKind::DegenerateVariance, "zero pooled variance");
    }
    r.statistic = (ma - mb) / se;
    return with_log_p(r, t_log_two_sided(r.statistic, r.df1));
}

StatResult pooled_pair_t_test(const std::vector<SampleGroup>& groups, std::size_t i, std::size_t j) {
    check_groups(groups);
    const auto within = within_summary(groups);
    if (within.ms_within <= 0.0) throw Error(ErrorKind::DegenerateVariance, "zero within-group variance");
    const double ni = static_cast<double>(groups[i].values.size());
    const double nj = static_cast<double>(groups[j].values.size());
    StatResult r;
    r.df1 = within.df_within;
    r.statistic = (within.means[i] - within.means[j]) / std::sqrt(within.ms_within * (1.0 / ni + 1.0 / nj));
    return with_log_p(r, t_log_two_sided(r.statistic, r.df1));
}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string significance_stars_log10(double log10_p) {
    if (log10_p < -3.0) return "***";
    if (log10_p < -2.0) return "**";
    if (log10_p < std::log10(0.05)) return "*";
    return "";
}

std::string format_p(double log10_p) {
    if (std::isinf(log10_p) && log10_p < 0) return "0.00e+00";
    double exponent = std::floor(log10_p);
    double mantissa = std::pow(10.0, log10_p - exponent);
    mantissa = std::round(mantissa * 100.0) / 100.0;
    if (mantissa >= 10.0) {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    char buf[64];
    const int e = static_cast<int>(exponent);
    std::snprintf(buf, sizeof buf, "%.2fe%c%02d", mantissa, e < 0 ? '-' : '+', std::abs(e));
    return buf;
}

std::string format_stat_p(double statistic, double log10_p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", statistic);
    return std::string(buf) + " / " + format_p(log10_p);
}

}  // namespace crossling::stats
