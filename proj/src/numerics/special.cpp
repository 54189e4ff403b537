#include "selcrb/numerics/special.hpp"

#include "selcrb/error.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <fmt/format.h>

namespace selcrb::numerics {

namespace {

constexpr double kTailMass = 1e-14;
constexpr long kMaxTerms = 1'000'000;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x))
    throw DomainError(fmt::format("{}: non-finite argument", what));
}

// Poisson(mean) mixture of regularized incomplete gamma terms,
// sum_j w_j * g(shape + j, half_x), with g = Q (upper) or P (lower).
// Truncation is relative to the running sum so deep tails keep their digits.
// The remaining weight is multiplied by a bound on |g| past the current index:
// the current term when g shrinks in that direction, 1 otherwise.
enum class Trend { increasing, decreasing, none };

template <class Term>
double poisson_mixture(double mean, double shape, double half_x, Term term, Trend trend) {
  if (mean == 0.0)
    return term(shape, half_x);

  const long mode = static_cast<long>(std::floor(mean));
  const double log_mean = std::log(mean);
  const double w_mode =
      std::exp(-mean + static_cast<double>(mode) * log_mean - std::lgamma(mode + 1.0));

  double sum = w_mode * term(shape + static_cast<double>(mode), half_x);
  long terms = 1;
  auto done = [&](double tail_weight, double g, bool shrinking) {
    const double cap = shrinking ? std::abs(g) : 1.0;
    return tail_weight * cap <= std::max(kTailMass * std::abs(sum), std::numeric_limits<double>::denorm_min());
  };

  // Upward from the mode; the ratio mean/(j+1) is < 1 and decreasing.
  double w = w_mode;
  for (long j = mode;; ++j) {
    w *= mean / static_cast<double>(j + 1);
    const double ratio = mean / static_cast<double>(j + 2);
    const double g = term(shape + static_cast<double>(j + 1), half_x);
    sum += w * g;
    if (++terms > kMaxTerms)
      throw DomainError("noncentral chi-squared series exceeded the term cap");
    if (w == 0.0 || done(w * ratio / (1.0 - ratio), g, trend == Trend::decreasing))
      break;
  }

  // Downward from the mode; the ratio j/mean is < 1 and decreasing.
  w = w_mode;
  for (long j = mode; j > 0; --j) {
    w *= static_cast<double>(j) / mean;
    const double g = term(shape + static_cast<double>(j - 1), half_x);
    sum += w * g;
    if (++terms > kMaxTerms)
      throw DomainError("noncentral chi-squared series exceeded the term cap");
    const double ratio = static_cast<double>(j - 1) / mean;
    if (w == 0.0 || (ratio < 1.0 && done(w * ratio / (1.0 - ratio), g, trend == Trend::increasing)))
      break;
  }
  return sum;
}

void check_chi2_args(double dof, double noncentrality, double x, const char* what) {
  require_finite(dof, what);
  require_finite(noncentrality, what);
  require_finite(x, what);
  if (dof <= 0.0 || noncentrality < 0.0 || x < 0.0)
    throw DomainError(fmt::format("{}: requires dof > 0, noncentrality >= 0, x >= 0", what));
}

void check_marcum_args(double order, double a, double b) {
  require_finite(a, "marcum_q_half");
  require_finite(b, "marcum_q_half");
  if (order != 0.5 && order != 1.5 && order != 2.5)
    throw DomainError(fmt::format("marcum_q_half: unsupported order {}", order));
  if (a < 0.0 || b < 0.0)
    throw DomainError("marcum_q_half: arguments must be nonnegative");
}

// For very large noncentrality the series needs O(sqrt(lambda)) terms; when x
// also lies far outside the bulk (mean dof + lambda, sd sqrt(2 dof + 4 lambda))
// the survival function is 0 or 1 to double precision. Returns the saturated
// survival value, or nullopt when the series has to be summed.
std::optional<double> saturated_sf(double dof, double noncentrality, double x) {
  if (noncentrality < 1e6)
    return std::nullopt;
  const double z = (x - dof - noncentrality) / std::sqrt(2.0 * dof + 4.0 * noncentrality);
  if (z < -40.0)
    return 1.0;
  if (z > 40.0)
    return 0.0;
  return std::nullopt;
}

} // namespace

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_sf(double x) {
  require_finite(x, "std_normal_sf");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double std_normal_interval(double lo, double hi) {
  if (hi <= lo)
    return 0.0;
  // Work in whichever tail keeps both terms small.
  if (lo >= 0.0)
    return std_normal_sf(lo) - std_normal_sf(hi);
  if (hi <= 0.0)
    return std_normal_cdf(hi) - std_normal_cdf(lo);
  return 1.0 - std_normal_cdf(lo) - std_normal_sf(hi);
}

double std_normal_outside(double lo, double hi) {
  if (hi <= lo)
    return 1.0;
  return std_normal_cdf(lo) + std_normal_sf(hi);
}

double noncentral_chi2_sf(double dof, double noncentrality, double x) {
  check_chi2_args(dof, noncentrality, x, "noncentral_chi2_sf");
  if (x == 0.0)
    return 1.0;
  if (const auto sat = saturated_sf(dof, noncentrality, x))
    return *sat;
  const double v = poisson_mixture(0.5 * noncentrality, 0.5 * dof, 0.5 * x,
                                   [](double s, double h) { return boost::math::gamma_q(s, h); },
                                   Trend::increasing);
  return std::clamp(v, 0.0, 1.0);
}

double noncentral_chi2_cdf(double dof, double noncentrality, double x) {
  check_chi2_args(dof, noncentrality, x, "noncentral_chi2_cdf");
  if (x == 0.0)
    return 0.0;
  if (const auto sat = saturated_sf(dof, noncentrality, x))
    return 1.0 - *sat;
  const double v = poisson_mixture(0.5 * noncentrality, 0.5 * dof, 0.5 * x,
                                   [](double s, double h) { return boost::math::gamma_p(s, h); },
                                   Trend::decreasing);
  return std::clamp(v, 0.0, 1.0);
}

double marcum_q_half(double order, double a, double b) {
  check_marcum_args(order, a, b);
  return noncentral_chi2_sf(2.0 * order, a * a, b * b);
}

double marcum_q_half_complement(double order, double a, double b) {
  check_marcum_args(order, a, b);
  return noncentral_chi2_cdf(2.0 * order, a * a, b * b);
}

} // namespace selcrb::numerics

namespace selcrb::numerics {

// Q_{m+1} - Q_m mixes the differences Q(s+1, x) - Q(s, x) = x^s e^{-x} / Gamma(s+1),
// which boost exposes as gamma_p_derivative(s+1, x).
double marcum_q_half_diff(double order, double a, double b) {
  check_marcum_args(order, a, b);
  if (order > 1.5)
    throw DomainError("marcum_q_half_diff: order + 1 must stay within the supported orders");
  if (b == 0.0 || saturated_sf(2.0 * order + 2.0, a * a, b * b))
    return 0.0;
  return poisson_mixture(0.5 * a * a, order, 0.5 * b * b, [](double s, double h) {
    return boost::math::gamma_p_derivative(s + 1.0, h);
  }, Trend::none);
}

double marcum_q_half_diff2(double order, double a, double b) {
  check_marcum_args(order, a, b);
  if (order > 0.5)
    throw DomainError("marcum_q_half_diff2: order + 2 must stay within the supported orders");
  if (b == 0.0 || saturated_sf(2.0 * order + 4.0, a * a, b * b))
    return 0.0;
  return poisson_mixture(0.5 * a * a, order, 0.5 * b * b, [](double s, double h) {
    return boost::math::gamma_p_derivative(s + 1.0, h) * (h / (s + 1.0) - 1.0);
  }, Trend::none);
}

} // namespace selcrb::numerics
