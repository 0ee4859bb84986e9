#pragma once

#include <memory>
#include <string>

namespace rdbcd {

/// Ethical weight as a function of the overall ethical risk x = E|theta|.
/// Every family maps [0,inf) into [0,1) and is nondecreasing; the
/// non-constant families vanish at x = 0.
///
///   constant        omega(x) = c, c in [0,1)
///   s_shaped        omega(x) = (1+x^-2)^{-2(s+1)} [2 - (1+x^-2)^{-2}], s >= 0
///   chi_square_cdf  omega(x) = P(chi2_r <= x), r > 0
///   thresholded     omega(x) = 0 for x <= cut, inner(x - cut) above it
struct WeightSpec {
  enum class Kind { constant, s_shaped, chi_square_cdf, thresholded };

  Kind kind = Kind::constant;
  double parameter = 0.0;  // c, s, r, or the threshold cut
  std::shared_ptr<const WeightSpec> inner;  // thresholded only

  static WeightSpec constant(double omega);
  static WeightSpec s_shaped(double s);
  static WeightSpec chi_square(double df);
  static WeightSpec thresholded(double cut, WeightSpec inner_spec);

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  std::string describe() const;
};

/// Evaluates the weight at x >= 0. The result is clamped to [0, 1-1e-9] so
/// the compound optimization stays well-posed even when a cdf rounds to 1.
double weight(const WeightSpec& spec, double x);

}  // namespace rdbcd
