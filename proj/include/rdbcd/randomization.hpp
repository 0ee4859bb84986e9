#pragma once

#include <functional>
#include <string>

namespace rdbcd {

/// Building blocks of the generic allocation-function family
///   phi(x,y,z) = F[D(x,y)^{H(z)} F^{-1}(y)] /
///                (F[D(x,y)^{H(z)} F^{-1}(y)] + F[D(1-x,1-y)^{H(z)} F^{-1}(1-y)])
/// with F: R+ -> R+ continuous strictly increasing, D a dissimilarity
/// measure (decreasing in x, increasing in y, D(x,x) = 1) and H(z)
/// nonincreasing. x is the current stratum proportion on A, y the current
/// target estimate, z the estimated stratum probability.
struct FamilyDescriptor {
  std::function<double(double)> f;
  std::function<double(double)> f_inverse;
  std::function<double(double, double)> dissimilarity;
  std::function<double(double)> exponent;
};

/// Evaluates the family on the open cube (0,1)^3. x = y returns y exactly.
double family_probability(const FamilyDescriptor& d, double x, double y, double z);

/// Allocation rule phi(x, y, z): probability of assigning treatment A.
///
/// Built-in rules:
///   zhang_cara   phi = y (sequential maximum-likelihood analog)
///   baz1         continuous forcing, F(t) = t^k, D = 1-(x-y), H = 1/z
///   baz2         discontinuous step forcing, D = 1 +/- eps,
///                H = 1/(strata_count * z)
///   erade        1-rho(1-y) / y / rho*y for x < = > y; constant in z
///   atkinson_da  (1-x)^2 / ((1-x)^2 + x^2), ignores y and z
class RandomizationRule {
 public:
  enum class Kind { zhang_cara, baz1, baz2, erade, atkinson_da, custom_family, custom };

  static RandomizationRule zhang_cara();
  static RandomizationRule baz1(double k);
  static RandomizationRule baz2(double epsilon, int strata_count);
  static RandomizationRule erade(double rho);
  static RandomizationRule atkinson_da();
  static RandomizationRule custom_family(FamilyDescriptor descriptor, std::string name);
  /// Arbitrary phi for experiments and tests; no contract checking.
  static RandomizationRule custom(std::function<double(double, double, double)> phi,
                                  std::string name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// Probability of assigning A. Throws std::domain_error when any of
  /// x, y, z lies on the closed boundary (the family is defined on the
  /// open cube).
  double allocation_probability(double x, double y, double z) const;

 private:
  RandomizationRule(Kind kind, std::string name,
                    std::function<double(double, double, double)> phi)
      : kind_(kind), name_(std::move(name)), phi_(std::move(phi)) {}

  Kind kind_;
  std::string name_;
  std::function<double(double, double, double)> phi_;
};

}  // namespace rdbcd
