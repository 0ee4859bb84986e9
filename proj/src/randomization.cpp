#include "rdbcd/randomization.hpp"

#include <cmath>
#include <stdexcept>

namespace rdbcd {

double family_probability(const FamilyDescriptor& d, double x, double y, double z) {
  if (x == y) return y;  // D(x,x) = 1, so both sides reduce and phi = y
  const double h = d.exponent(z);
  const double a = d.f(std::pow(d.dissimilarity(x, y), h) * d.f_inverse(y));
  const double b = d.f(std::pow(d.dissimilarity(1.0 - x, 1.0 - y), h) * d.f_inverse(1.0 - y));
  return a / (a + b);
}

RandomizationRule RandomizationRule::zhang_cara() {
  return RandomizationRule(Kind::zhang_cara, "zhang_cara",
                           [](double, double y, double) { return y; });
}

RandomizationRule RandomizationRule::baz1(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("baz1: k must be positive");
  FamilyDescriptor d{
      [k](double t) { return std::pow(t, k); },
      [k](double t) { return std::pow(t, 1.0 / k); },
      [](double x, double y) { return 1.0 - (x - y); },
      [](double z) { return 1.0 / z; },
  };
  return RandomizationRule(Kind::baz1, "baz1",
                           [d](double x, double y, double z) {
                             return family_probability(d, x, y, z);
                           });
}

RandomizationRule RandomizationRule::baz2(double epsilon, int strata_count) {
  if (!(epsilon >= 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("baz2: epsilon must lie in [0,1)");
  }
  if (strata_count < 1) throw std::invalid_argument("baz2: strata_count must be >= 1");
  const double k = static_cast<double>(strata_count);
  FamilyDescriptor d{
      [](double t) { return t; },
      [](double t) { return t; },
      [epsilon](double x, double y) {
        if (x < y) return 1.0 + epsilon;
        if (x > y) return 1.0 - epsilon;
        return 1.0;
      },
      [k](double z) { return 1.0 / (k * z); },
  };
  return RandomizationRule(Kind::baz2, "baz2",
                           [d](double x, double y, double z) {
                             return family_probability(d, x, y, z);
                           });
}

RandomizationRule RandomizationRule::erade(double rho) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw std::invalid_argument("erade: rho must lie in [0,1)");
  }
  return RandomizationRule(Kind::erade, "erade", [rho](double x, double y, double) {
    if (x < y) return 1.0 - rho * (1.0 - y);
    if (x > y) return rho * y;
    return y;
  });
}

RandomizationRule RandomizationRule::atkinson_da() {
  // Family instance with F(t) = t^2, D(x,y) = 1 - 2(x - y), H = 1 and the
  // target pinned at 1/2; reduces to (1-x)^2 / ((1-x)^2 + x^2).
  FamilyDescriptor d{
      [](double t) { return t * t; },
      [](double t) { return std::sqrt(t); },
      [](double x, double y) { return 1.0 - 2.0 * (x - y); },
      [](double) { return 1.0; },
  };
  return RandomizationRule(Kind::atkinson_da, "atkinson_da",
                           [d](double x, double, double z) {
                             return family_probability(d, x, 0.5, z);
                           });
}

RandomizationRule RandomizationRule::custom_family(FamilyDescriptor descriptor,
                                                   std::string name) {
  return RandomizationRule(Kind::custom_family, std::move(name),
                           [d = std::move(descriptor)](double x, double y, double z) {
                             return family_probability(d, x, y, z);
                           });
}

RandomizationRule RandomizationRule::custom(std::function<double(double, double, double)> phi,
                                            std::string name) {
  return RandomizationRule(Kind::custom, std::move(name), std::move(phi));
}

double RandomizationRule::allocation_probability(double x, double y, double z) const {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 && z > 0.0 && z < 1.0)) {
    throw std::domain_error("allocation_probability: (x,y,z) must lie in the open unit cube");
  }
  return phi_(x, y, z);
}

}  // namespace rdbcd
