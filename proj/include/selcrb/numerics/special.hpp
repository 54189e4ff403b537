#pragma once

// Gaussian and noncentral chi-squared special functions.

namespace selcrb::numerics {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density. Throws DomainError for non-finite input.
double std_normal_pdf(double x);

/// Standard normal cdf, accurate in both tails.
double std_normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double std_normal_sf(double x);

/// Pr(lo < Z < hi) = Phi(hi) - Phi(lo), evaluated on the side that avoids cancellation.
double std_normal_interval(double lo, double hi);

/// Pr(Z < lo or Z > hi) = 1 - Phi(hi) + Phi(lo).
double std_normal_outside(double lo, double hi);

/// Survival function of the noncentral chi-squared distribution.
///
/// Evaluated as the Poisson(noncentrality/2) mixture of central chi-squared
/// tails with dof + 2j degrees of freedom. Summation starts at the Poisson
/// mode and walks outwards until the unvisited Poisson mass is below 1e-14.
double noncentral_chi2_sf(double dof, double noncentrality, double x);

/// Lower tail of the same distribution, summed directly (no 1 - sf cancellation).
double noncentral_chi2_cdf(double dof, double noncentrality, double x);

/// Generalized Marcum Q-function Q_m(a, b) = Pr(chi2_{2m}(a^2) > b^2)
/// for the half-integer orders m in {1/2, 3/2, 5/2}.
double marcum_q_half(double order, double a, double b);

/// 1 - Q_m(a, b) summed directly.
double marcum_q_half_complement(double order, double a, double b);

/// Q_{m+1}(a, b) - Q_m(a, b), summed termwise (every term is positive).
double marcum_q_half_diff(double order, double a, double b);

/// Q_{m+2}(a, b) - 2 Q_{m+1}(a, b) + Q_m(a, b), summed termwise.
double marcum_q_half_diff2(double order, double a, double b);

} // namespace selcrb::numerics
