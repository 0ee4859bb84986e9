#pragma once

#include <Eigen/Core>

#include <stdexcept>

#include "rdbcd/criteria.hpp"
#include "rdbcd/design_space.hpp"
#include "rdbcd/weights.hpp"

namespace rdbcd {

/// Raised when the target solver fails to reach its residual tolerance;
/// carries the best iterate found and its gradient residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string message, AllocationVector best, double resid)
      : std::runtime_error(std::move(message)),
        best_iterate(std::move(best)),
        residual(resid) {}

  AllocationVector best_iterate;
  double residual;
};

struct CompoundTargetResult {
  AllocationVector pi_star;
  double omega_value = 0.0;       ///< evaluated weight used in the solve
  double gradient_residual = 0.0; ///< sup-norm of the compound-criterion gradient at pi_star
  EfficiencyPair efficiencies;
  bool degenerate = false;        ///< E|theta| = 0; balanced target returned
  int iterations = 0;
};

/// The jointly balanced allocation, optimal for every criterion C1-C5.
AllocationVector balanced_target(const DesignSpace& space);

/// Ethical ideal: indicator of theta > 0; strata with theta = 0 get 1/2
/// (every allocation is equivalent there).
AllocationVector ethical_target(const Eigen::VectorXd& theta);

/// Minimizer of the compound criterion
///   omega / Psi_E(pi) + (1 - omega) / Psi_I(pi)
/// with omega evaluated once at the overall ethical risk E|theta|.
/// Solved by damped Newton on logit-transformed pi starting from the
/// balanced allocation; the result is certified by the stationarity
/// residual. Throws SolverError on non-convergence.
CompoundTargetResult compound_target(CriterionId id, const DesignSpace& space,
                                     const Eigen::VectorXd& theta,
                                     const CovariateDistribution& dist,
                                     const WeightSpec& spec);

/// Same solve with an explicitly fixed weight value in [0, 1).
CompoundTargetResult compound_target_fixed_omega(CriterionId id, const DesignSpace& space,
                                                 const Eigen::VectorXd& theta,
                                                 const CovariateDistribution& dist,
                                                 double omega);

struct ConstrainedTargetResult {
  double omega_c = 0.0;  ///< constant weight achieving the efficiency floor
  CompoundTargetResult target;
};

/// Most ethical target subject to Psi_I(pi) = efficiency_floor, found by
/// bisection over the constant weight (Psi_I of the compound target is
/// continuous and decreasing in omega). Requires efficiency_floor in (0,1);
/// the solve stops at |Psi_I - floor| <= 1e-6.
ConstrainedTargetResult constrained_target(CriterionId id, const DesignSpace& space,
                                           const Eigen::VectorXd& theta,
                                           const CovariateDistribution& dist,
                                           double efficiency_floor);

/// Bandyopadhyay-Biswas comparator: standard normal cdf of theta/T per
/// stratum. Requires T > 0.
AllocationVector bandyopadhyay_biswas_target(const Eigen::VectorXd& theta, double t_scale);

}  // namespace rdbcd
