#include "rdbcd/design_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdbcd {

DesignSpace::DesignSpace(int t_levels, int w_levels) : j_(t_levels), l_(w_levels) {
  if (t_levels < 1 || w_levels < 1) {
    throw std::invalid_argument("DesignSpace: need at least one non-reference level per factor");
  }
}

int DesignSpace::stratum_index(const Profile& z) const {
  if (!contains(z)) {
    throw std::out_of_range("DesignSpace: profile (" + std::to_string(z.t) + "," +
                            std::to_string(z.w) + ") outside grid");
  }
  return z.w * (j_ + 1) + z.t;
}

Profile DesignSpace::profile_of(int stratum) const {
  if (stratum < 0 || stratum >= strata_count()) {
    throw std::out_of_range("DesignSpace: stratum index " + std::to_string(stratum));
  }
  return Profile{stratum % (j_ + 1), stratum / (j_ + 1)};
}

Eigen::VectorXd DesignSpace::regressor(const Profile& z) const {
  if (!contains(z)) {
    throw std::out_of_range("DesignSpace: profile (" + std::to_string(z.t) + "," +
                            std::to_string(z.w) + ") outside grid");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(regressor_dim());
  if (z.t >= 1) f(z.t - 1) = 1.0;
  if (z.w >= 1) f(j_ + z.w - 1) = 1.0;
  if (z.t >= 1 && z.w >= 1) f(j_ + l_ + (z.t - 1) * l_ + (z.w - 1)) = 1.0;
  return f;
}

void ModelParams::validate(const DesignSpace& space) const {
  const auto p = space.regressor_dim();
  if (beta_a.size() != p || beta_b.size() != p) {
    throw std::invalid_argument("ModelParams: beta length " + std::to_string(beta_a.size()) +
                                "/" + std::to_string(beta_b.size()) + ", expected " +
                                std::to_string(p));
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("ModelParams: sigma2 must be positive");
  }
}

void CovariateDistribution::validate(const DesignSpace& space) const {
  if (p.size() != space.strata_count()) {
    throw std::invalid_argument("CovariateDistribution: " + std::to_string(p.size()) +
                                " entries for " + std::to_string(space.strata_count()) +
                                " strata");
  }
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    if (!(p(s) > 0.0)) {
      throw std::invalid_argument("CovariateDistribution: entry " + std::to_string(s) +
                                  " not strictly positive");
    }
  }
  if (std::abs(p.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("CovariateDistribution: entries sum to " +
                                std::to_string(p.sum()));
  }
}

CovariateDistribution CovariateDistribution::uniform(const DesignSpace& space) {
  const int k = space.strata_count();
  return CovariateDistribution{Eigen::VectorXd::Constant(k, 1.0 / k)};
}

Eigen::VectorXd theta_surface(const DesignSpace& space, double alpha,
                              const Eigen::VectorXd& tau) {
  if (tau.size() != space.regressor_dim()) {
    throw std::invalid_argument("theta_surface: tau length mismatch");
  }
  Eigen::VectorXd theta(space.strata_count());
  for (int s = 0; s < space.strata_count(); ++s) {
    theta(s) = alpha + space.regressor(space.profile_of(s)).dot(tau);
  }
  return theta;
}

Eigen::VectorXd theta_surface(const DesignSpace& space, const ModelParams& params) {
  params.validate(space);
  return theta_surface(space, params.alpha(), params.tau());
}

}  // namespace rdbcd
