#include "rdbcd/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdbcd/special_functions.hpp"

namespace rdbcd {

namespace {
constexpr double kWeightCeiling = 1.0 - 1e-9;
}

WeightSpec WeightSpec::constant(double omega) {
  WeightSpec s;
  s.kind = Kind::constant;
  s.parameter = omega;
  s.validate();
  return s;
}

WeightSpec WeightSpec::s_shaped(double sv) {
  WeightSpec s;
  s.kind = Kind::s_shaped;
  s.parameter = sv;
  s.validate();
  return s;
}

WeightSpec WeightSpec::chi_square(double df) {
  WeightSpec s;
  s.kind = Kind::chi_square_cdf;
  s.parameter = df;
  s.validate();
  return s;
}

WeightSpec WeightSpec::thresholded(double cut, WeightSpec inner_spec) {
  WeightSpec s;
  s.kind = Kind::thresholded;
  s.parameter = cut;
  s.inner = std::make_shared<const WeightSpec>(std::move(inner_spec));
  s.validate();
  return s;
}

void WeightSpec::validate() const {
  switch (kind) {
    case Kind::constant:
      if (!(parameter >= 0.0) || !(parameter < 1.0)) {
        throw std::invalid_argument("weight: constant omega must lie in [0,1)");
      }
      return;
    case Kind::s_shaped:
      if (!(parameter >= 0.0)) throw std::invalid_argument("weight: s must be >= 0");
      return;
    case Kind::chi_square_cdf:
      if (!(parameter > 0.0)) throw std::invalid_argument("weight: df must be > 0");
      return;
    case Kind::thresholded:
      if (!(parameter >= 0.0)) throw std::invalid_argument("weight: threshold must be >= 0");
      if (!inner) throw std::invalid_argument("weight: thresholded needs an inner spec");
      if (inner->kind == Kind::thresholded) {
        throw std::invalid_argument("weight: thresholded inner spec must be a base family");
      }
      inner->validate();
      return;
  }
}

std::string WeightSpec::describe() const {
  switch (kind) {
    case Kind::constant: return "constant(" + std::to_string(parameter) + ")";
    case Kind::s_shaped: return "s_shaped(" + std::to_string(parameter) + ")";
    case Kind::chi_square_cdf: return "chi_square_cdf(" + std::to_string(parameter) + ")";
    case Kind::thresholded:
      return "thresholded(" + std::to_string(parameter) + "," + inner->describe() + ")";
  }
  return "?";
}

double weight(const WeightSpec& spec, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("weight: x must be nonnegative");
  spec.validate();
  double value = 0.0;
  switch (spec.kind) {
    case WeightSpec::Kind::constant:
      value = spec.parameter;
      break;
    case WeightSpec::Kind::s_shaped: {
      if (x == 0.0) return 0.0;
      const double a = std::pow(1.0 + 1.0 / (x * x), -2.0);
      value = std::pow(a, spec.parameter + 1.0) * (2.0 - a);
      break;
    }
    case WeightSpec::Kind::chi_square_cdf:
      value = chi_square_cdf(spec.parameter, x);
      break;
    case WeightSpec::Kind::thresholded:
      value = x <= spec.parameter ? 0.0 : weight(*spec.inner, x - spec.parameter);
      break;
  }
  return std::clamp(value, 0.0, kWeightCeiling);
}

}  // namespace rdbcd
