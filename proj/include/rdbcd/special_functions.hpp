#pragma once

namespace rdbcd {

/// Standard normal cdf, absolute accuracy better than 1e-14.
double normal_cdf(double x);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
/// Series expansion for x < a+1, continued fraction otherwise; absolute
/// accuracy around 1e-14.
double regularized_gamma_p(double a, double x);

/// cdf of a chi-square variable with df degrees of freedom (df > 0).
double chi_square_cdf(double df, double x);

}  // namespace rdbcd
