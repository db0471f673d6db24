#pragma once

#include <span>

namespace calibkit::numerics {

/// ln Gamma(x) for x > 0 (Lanczos approximation, ~1e-15 relative accuracy).
double log_gamma(double x);

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
double log_beta(double a, double b);

/// Regularized incomplete Beta function I(x; a, b).
///
/// Evaluated by the continued fraction of the incomplete Beta integral using
/// the modified Lentz method, after switching to 1 - I(1 - x; b, a) when
/// x > (a + 1) / (a + b + 2) so the fraction converges quickly. Arguments
/// outside (0, 1) short-circuit to 0 or 1.
double reg_inc_beta(double x, double a, double b);

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Sample standard deviation (n - 1 denominator), two-pass.
double sample_std(std::span<const double> xs);

double mean(std::span<const double> xs);

/// Middle order statistic; mean of the two middle values for even length.
double median(std::span<const double> xs);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> xs);

}  // namespace calibkit::numerics
