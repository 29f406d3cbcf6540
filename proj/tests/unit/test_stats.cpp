#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "crossling/stats/distributions.hpp"
#include "crossling/stats/tests.hpp"

namespace crossling::stats {
namespace {

// Monte Carlo estimate of P(Q <= q) for k means and df degrees of freedom.
double monte_carlo_range_cdf(double q, int k, int df, int draws, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::chi_squared_distribution<double> chi2(df);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
        double lo = 1e300;
        double hi = -1e300;
        for (int j = 0; j < k; ++j) {
            const double z = normal(rng);
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
        const double s = std::sqrt(chi2(rng) / df);
        if ((hi - lo) / s <= q) ++hits;
    }
    return static_cast<double>(hits) / draws;
}

TEST(IncompleteBeta, MatchesBoostOnGrid) {
    for (double a : {0.5, 1.0, 2.5, 7.0, 40.0}) {
        for (double b : {0.5, 1.0, 3.0, 12.0}) {
            for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
                const auto ib = incomplete_beta(a, b, x);
                EXPECT_NEAR(std::exp(ib.log_lower), boost::math::ibeta(a, b, x), 1e-12) << a << " " << b << " " << x;
                EXPECT_NEAR(std::exp(ib.log_upper), boost::math::ibetac(a, b, x), 1e-12) << a << " " << b << " " << x;
            }
        }
    }
}

TEST(IncompleteBeta, TinyTailsStayInLogSpace) {
    // F = 400 with (3, 400) df has p far below 1e-100; log must stay finite.
    const double log_p = f_log_sf(400.0, 3.0, 400.0);
    EXPECT_TRUE(std::isfinite(log_p));
    EXPECT_LT(log_p / std::numbers::ln10, -100.0);
    // compare to boost where representable
    const double log_p_mid = f_log_sf(30.0, 3.0, 400.0);
    const double x = 400.0 / (400.0 + 3.0 * 30.0);
    EXPECT_NEAR(log_p_mid, std::log(boost::math::ibeta(200.0, 1.5, x)), 1e-9);
}

TEST(TDistribution, TwoSidedMatchesBoost) {
    for (double df : {1.0, 3.0, 6.0, 30.0, 500.0}) {
        boost::math::students_t dist(df);
        for (double t : {0.1, 1.0, 2.5, 8.0}) {
            const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
            EXPECT_NEAR(std::exp(t_log_two_sided(t, df)), expected, 1e-12);
        }
    }
}

TEST(StudentizedRange, BoundaryValues) {
    EXPECT_EQ(studentized_range_cdf(0.0, 3, 10), 0.0);
    EXPECT_GE(studentized_range_cdf(100.0, 3, 10), 0.9999);
    EXPECT_LE(studentized_range_cdf(100.0, 3, 10), 1.0);
}

TEST(StudentizedRange, CriticalValueNearPointNineFive) {
    // tabulated q_{0.05}(3, 10) = 3.877
    EXPECT_NEAR(studentized_range_cdf(3.88, 3, 10), 0.95, 5e-3);
    // reference values from an independent implementation (scipy)
    EXPECT_NEAR(studentized_range_cdf(3.88, 3, 10), 0.9501860942289231, 1e-4);
    EXPECT_NEAR(studentized_range_cdf(3.5, 4, 20), 0.9050415494536981, 1e-4);
    EXPECT_NEAR(studentized_range_cdf(1.0, 5, 2), 0.06250233552797721, 1e-4);
}

TEST(StudentizedRange, TwoMeansReduceToNormalAndT) {
    // k = 2: Q = sqrt(2)|T|, so P(Q <= q) = 1 - p_t(q / sqrt 2).
    const double large_df = studentized_range_cdf(3.0, 2, 1e6);
    EXPECT_NEAR(large_df, 2.0 * normal_cdf(3.0 / std::numbers::sqrt2) - 1.0, 1e-4);
    for (double df : {2.0, 5.0, 17.0}) {
        for (double q : {0.5, 2.0, 4.5}) {
            const double expected = 1.0 - std::exp(t_log_two_sided(q / std::numbers::sqrt2, df));
            EXPECT_NEAR(studentized_range_cdf(q, 2, df), expected, 1e-4) << df << " " << q;
        }
    }
}

TEST(StudentizedRange, AgreesWithMonteCarlo) {
    const double mc = monte_carlo_range_cdf(3.0, 4, 8, 400000, 11);
    EXPECT_NEAR(studentized_range_cdf(3.0, 4, 8), mc, 4e-3);
}

TEST(StudentizedRange, MonotoneInQ) {
    double prev = 0.0;
    for (double q = 0.0; q <= 8.0; q += 0.25) {
        const double c = studentized_range_cdf(q, 5, 12);
        EXPECT_GE(c, prev - 1e-12);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        prev = c;
    }
}

TEST(Anova, ClosedFormThreeGroups) {
    // SSB = 6 (df 2), SSW = 6 (df 6) -> F = 3; P(F_{2,6} > x) = (1 + x/3)^-3
    const auto r = one_way_anova({{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {3, 4, 5}}});
    EXPECT_DOUBLE_EQ(r.statistic, 3.0);
    EXPECT_NEAR(r.p_value, std::pow(1.0 + 3.0 / 3.0, -3.0), 1e-9);
    EXPECT_EQ(r.df1, 2.0);
    EXPECT_EQ(r.df2, 6.0);
}

TEST(Anova, IdenticalGroupsGiveZero) {
    const auto r = one_way_anova({{"a", {1, 2, 3}}, {"b", {1, 2, 3}}});
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(Anova, DegenerateVariance) {
    EXPECT_THROW(one_way_anova({{"a", {2, 2}}, {"b", {2, 2}}}), Error);
    const auto r = one_way_anova({{"a", {1, 1}}, {"b", {2, 2}}});
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(std::isinf(r.statistic));
    EXPECT_EQ(r.p_value, 0.0);
    try {
        one_way_anova({{"a", {1, 1}}, {"b", {2, 2}}}, DegeneratePolicy::Throw);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateVariance);
    }
}

TEST(Anova, TwoGroupsEqualsSquaredT) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        SampleGroup a{"a", {}};
        SampleGroup b{"b", {}};
        const int na = 2 + trial % 7;
        const int nb = 3 + trial % 5;
        for (int i = 0; i < na; ++i) a.values.push_back(normal(rng));
        for (int i = 0; i < nb; ++i) b.values.push_back(normal(rng) + 0.5);
        const auto f = one_way_anova({a, b});
        const auto t = unpaired_t_test(a, b);
        EXPECT_NEAR(f.statistic, t.statistic * t.statistic, 1e-9 * std::max(1.0, f.statistic));
        EXPECT_NEAR(f.p_value, t.p_value, 1e-9);
    }
}

TEST(TTest, IdenticalGroups) {
    const auto r = unpaired_t_test({"a", {1, 2, 3}}, {"b", {1, 2, 3}});
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
}

TEST(TTest, PooledHandComputation) {
    // pooled variance 5/3, se = sqrt(5/3 * (1/4 + 1/4)), t = -1 / se
    const auto r = unpaired_t_test({"a", {1, 2, 3, 4}}, {"b", {2, 3, 4, 5}});
    EXPECT_NEAR(r.statistic, -1.0 / std::sqrt(5.0 / 6.0), 1e-12);
    EXPECT_EQ(r.df1, 6.0);
    boost::math::students_t dist(6.0);
    const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.statistic)));
    EXPECT_NEAR(r.p_value, expected, 1e-12);
    EXPECT_NEAR(r.p_value, 0.3153335962012298, 1e-9);
}

TEST(TTest, WelchDegreesOfFreedom) {
    const auto r = unpaired_t_test({"a", {1, 2, 3, 4}}, {"b", {2, 4, 6, 8, 10}}, TTestVariant::Welch);
    // sa = (5/3)/4, sb = 10/5
    const double sa = (5.0 / 3.0) / 4.0;
    const double sb = 10.0 / 5.0;
    const double df = (sa + sb) * (sa + sb) / (sa * sa / 3.0 + sb * sb / 4.0);
    EXPECT_NEAR(r.df1, df, 1e-12);
    EXPECT_NEAR(r.statistic, (2.5 - 6.0) / std::sqrt(sa + sb), 1e-12);
}

TEST(TTest, DegenerateVariance) {
    EXPECT_THROW(unpaired_t_test({"a", {1, 1}}, {"b", {2, 2}}), Error);
}

TEST(Tukey, IdenticalGroupsNeverReject) {
    const std::vector<SampleGroup> groups{{"a", {1, 2, 3}}, {"b", {1, 2, 3}}, {"c", {1, 2, 3}}};
    for (const auto& d : tukey_hsd(groups)) {
        EXPECT_NEAR(d.p_adjusted, 1.0, 1e-9);
        EXPECT_FALSE(d.reject);
    }
}

TEST(Tukey, ShiftedGroupRejectsOnlyItsPairs) {
    // unit spread, c shifted by ten standard deviations
    const std::vector<double> base{-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
    std::vector<SampleGroup> groups{{"a", base}, {"b", {}}, {"c", {}}};
    for (double x : base) {
        groups[1].values.push_back(x + 0.1);
        groups[2].values.push_back(x + 10.0);
    }
    const auto decisions = tukey_hsd(groups, 0.05);
    ASSERT_EQ(decisions.size(), 3u);
    EXPECT_FALSE(decisions[0].reject);  // a-b
    EXPECT_TRUE(decisions[1].reject);   // a-c
    EXPECT_TRUE(decisions[2].reject);   // b-c
}

TEST(Tukey, TwoGroupsMatchesTTest) {
    const std::vector<SampleGroup> groups{{"a", {1.0, 2.2, 2.9, 4.1}}, {"b", {2.5, 3.1, 4.6, 5.0, 5.5}}};
    const auto d = tukey_hsd(groups).front();
    const auto t = unpaired_t_test(groups[0], groups[1]);
    EXPECT_NEAR(d.p_adjusted, t.p_value, 1e-4);
}

TEST(Tukey, NeverLessConservativeThanUnadjustedPair) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SampleGroup> groups;
        const int k = 3 + trial % 3;
        for (int g = 0; g < k; ++g) {
            SampleGroup sg{"g" + std::to_string(g), {}};
            const int n = 4 + (trial + g) % 6;
            for (int i = 0; i < n; ++i) sg.values.push_back(normal(rng) + 0.4 * g);
            groups.push_back(sg);
        }
        const auto decisions = tukey_hsd(groups);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (std::size_t j = i + 1; j < groups.size(); ++j, ++idx) {
                const auto lsd = pooled_pair_t_test(groups, i, j);
                EXPECT_GE(decisions[idx].p_adjusted + 1e-4, lsd.p_value);
            }
        }
    }
}

TEST(Kappa, TrivialCases) {
    EXPECT_DOUBLE_EQ(cohens_kappa<int>({1, 2, 3, 1}, {1, 2, 3, 1}), 1.0);
    EXPECT_DOUBLE_EQ(cohens_kappa<int>({1, 1, 0, 0}, {1, 0, 1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(cohens_kappa<std::string>({"A", "A", "A"}, {"A", "A", "A"}), 1.0);
    EXPECT_THROW(cohens_kappa<int>({1, 2}, {1}), Error);
}

TEST(Kappa, Symmetric) {
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> label(1, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> a(10);
        std::vector<int> b(10);
        for (auto& x : a) x = label(rng);
        for (auto& x : b) x = label(rng);
        EXPECT_DOUBLE_EQ(cohens_kappa(a, b), cohens_kappa(b, a));
        const double k = cohens_kappa(a, b);
        EXPECT_GE(k, -1.0);
        EXPECT_LE(k, 1.0);
    }
}

TEST(Formatting, StarsAndScientific) {
    EXPECT_EQ(significance_stars(3e-4), "***");
    EXPECT_EQ(significance_stars(0.004), "**");
    EXPECT_EQ(significance_stars(0.03), "*");
    EXPECT_EQ(significance_stars(0.2), "");
    EXPECT_EQ(format_stat_p(153.47, std::log10(2.52e-80)), "153.47 / 2.52e-80");
    EXPECT_EQ(format_p(std::log10(8.13e-3)), "8.13e-03");
    EXPECT_EQ(format_p(-400.0 + std::log10(3.0)), "3.00e-400");
    EXPECT_EQ(significance_stars_log10(-400.0), "***");
}

TEST(PValues, MonotoneInStatistic) {
    double prev = 1.0;
    for (double f = 0.0; f < 50.0; f += 0.5) {
        const double p = std::exp(f_log_sf(f, 3.0, 40.0));
        EXPECT_LE(p, prev + 1e-15);
        EXPECT_GE(p, 0.0);
        prev = p;
    }
}

}  // namespace
}  // namespace crossling::stats
