#pragma once

#include <Eigen/Core>

namespace rdbcd {

/// Covariate profile: level of the first factor T (0..J) and of the second
/// factor W (0..L). Level 0 is the reference category of each factor.
struct Profile {
  int t = 0;
  int w = 0;
};

/// Per-stratum allocation proportions (fraction of subjects on treatment A).
/// Entries live in [0,1]; solver targets are strictly interior.
using AllocationVector = Eigen::VectorXd;

/// Two-factor categorical covariate grid with full interaction coding.
///
/// T has J non-reference levels and W has L non-reference levels. The dummy
/// regressor f(z) stacks the T block (J entries), the W block (L entries)
/// and the TxW interaction block (J*L entries, T-major), so the regressor
/// dimension is p = J + L + J*L and the reference cell (0,0) maps to the
/// zero vector.
///
/// Strata are enumerated with the T level varying fastest:
///   (0,0), (1,0), ..., (J,0), (0,1), (1,1), ..., (J,L)
/// i.e. stratum_index(j,l) = l*(J+1) + j. Every per-stratum vector in this
/// library (probabilities, allocations, effect differences, counts) uses
/// this order.
class DesignSpace {
 public:
  /// Requires t_levels >= 1 and w_levels >= 1 (counts of non-reference
  /// levels); throws std::invalid_argument otherwise.
  DesignSpace(int t_levels, int w_levels);

  int t_levels() const { return j_; }
  int w_levels() const { return l_; }
  int regressor_dim() const { return j_ + l_ + j_ * l_; }
  int strata_count() const { return (j_ + 1) * (l_ + 1); }
  /// Dimension of the full parameter vector (mu_A, mu_B, beta_A, beta_B).
  int model_dim() const { return 2 + 2 * regressor_dim(); }

  bool contains(const Profile& z) const {
    return z.t >= 0 && z.t <= j_ && z.w >= 0 && z.w <= l_;
  }
  int stratum_index(const Profile& z) const;
  Profile profile_of(int stratum) const;

  /// Dummy coding of a profile; throws std::out_of_range for profiles
  /// outside the grid.
  Eigen::VectorXd regressor(const Profile& z) const;

 private:
  int j_;
  int l_;
};

/// Parameters of the homoscedastic linear response model: baseline effects
/// mu_A, mu_B, regression vectors beta_A, beta_B (length p) and the common
/// response variance sigma2.
struct ModelParams {
  double mu_a = 0.0;
  double mu_b = 0.0;
  Eigen::VectorXd beta_a;
  Eigen::VectorXd beta_b;
  double sigma2 = 1.0;

  double alpha() const { return mu_a - mu_b; }
  Eigen::VectorXd tau() const { return beta_a - beta_b; }

  /// Throws std::invalid_argument if the beta lengths do not match the
  /// regressor dimension or sigma2 <= 0.
  void validate(const DesignSpace& space) const;
};

/// Covariate distribution over strata: every entry strictly positive,
/// summing to one.
struct CovariateDistribution {
  Eigen::VectorXd p;

  /// Throws std::invalid_argument on non-positive entries or if the total
  /// deviates from 1 by more than 1e-12.
  void validate(const DesignSpace& space) const;

  static CovariateDistribution uniform(const DesignSpace& space);
};

/// Treatment-effect difference theta(j,l) = alpha + f(z)^t tau per stratum.
Eigen::VectorXd theta_surface(const DesignSpace& space, double alpha,
                              const Eigen::VectorXd& tau);
Eigen::VectorXd theta_surface(const DesignSpace& space,
                              const ModelParams& params);

}  // namespace rdbcd
