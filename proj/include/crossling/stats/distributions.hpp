/// @file distributions.hpp
/// @brief Distribution functions backing the hypothesis tests.
///
/// Tail probabilities are evaluated directly on the small side of the
/// incomplete beta function and carried in log space, so p-values far below
/// the double range still have a finite log10 representation.

#pragma once

namespace crossling::stats {

/// Standard normal CDF.
double normal_cdf(double z) noexcept;

/// Upper tail of the standard normal, accurate for large z.
double normal_sf(double z) noexcept;

/// Regularized incomplete beta I_x(a, b) and its complement, each returned
/// as a natural log. Continued fraction (modified Lentz) to 1e-12 relative.
struct IncompleteBeta {
    double log_lower;  ///< log I_x(a, b)
    double log_upper;  ///< log (1 - I_x(a, b))
};
IncompleteBeta incomplete_beta(double a, double b, double x);

/// Survival function of the F distribution, natural log. P(F > f).
double f_log_sf(double f, double d1, double d2);

/// Two-sided p-value of Student's t, natural log. P(|T| > |t|).
double t_log_two_sided(double t, double df);

/// CDF of the studentized range Q for k means and df degrees of freedom.
/// Double Gauss-Legendre quadrature; throws NonConvergence when successive
/// refinements disagree by more than 1e-4.
double studentized_range_cdf(double q, int k, double df);

/// P(range of k iid standard normals <= w); the df -> infinity limit.
double normal_range_cdf(double w, int k);

}  // namespace crossling::stats
