#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

#include "rdbcd/design_space.hpp"

namespace rdbcd {

/// Inferential criteria over the information matrix of the linear model:
///   C1  det of the covariance of all parameter estimates
///   C2  det of the covariance of (beta_A, beta_B)
///   C3  trace of the covariance of all parameter estimates
///   C4  trace of the covariance of (beta_A, beta_B)
///   C5  trace of the covariance of beta_A - beta_B (identical to C4)
enum class CriterionId { C1, C2, C3, C4, C5 };

std::string to_string(CriterionId id);
CriterionId parse_criterion(const std::string& name);

/// Per-stratum subject counts: N subjects of which Ntilde were assigned A.
struct StratumCounts {
  Eigen::VectorXi subjects;  // N(j,l)
  Eigen::VectorXi on_a;      // Ntilde(j,l)

  long long total() const { return subjects.cast<long long>().sum(); }
  /// Ntilde/N per stratum; NaN where N = 0.
  Eigen::VectorXd proportions() const;
  /// Throws std::invalid_argument on negative counts, size mismatch, or
  /// Ntilde > N.
  void validate(const DesignSpace& space) const;
};

/// Average per-observation information matrix M = X^t X / n of the model
/// for a design with the given per-stratum counts (the order of subjects
/// within a stratum does not affect M). Size (2+2p) square.
/// Throws std::domain_error when all counts are zero.
Eigen::MatrixXd information_matrix(const DesignSpace& space, const StratumCounts& counts);

/// Closed-form criterion value with pi = Ntilde/N plugged in. Any stratum
/// with N = 0 or a boundary proportion (0 or 1) yields +infinity, the
/// distinguished infinite-loss value.
double criterion_closed_form(CriterionId id, const DesignSpace& space,
                             const StratumCounts& counts, double sigma2);

/// Same criterion evaluated from the information matrix by dense inversion
/// (the independent route; used to cross-check the closed forms). Returns
/// +infinity when M is numerically singular (pivot below 1e-12 * scale).
double criterion_from_information(CriterionId id, const DesignSpace& space,
                                  const StratumCounts& counts, double sigma2);

/// Design-induced loss of inferential precision: the criterion with the
/// random stratum counts replaced by their expectations, E[g(N)] ~ g(n p).
/// Boundary allocations yield +infinity.
double expected_inferential(CriterionId id, const DesignSpace& space,
                            const AllocationVector& pi, const CovariateDistribution& dist,
                            long long n, double sigma2);

/// Expected ethical loss: sum over strata of
///   p |theta| {1/2 - [1/2 - pi] sgn(theta)}.
double ethical_expected(const DesignSpace& space, const AllocationVector& pi,
                        const Eigen::VectorXd& theta, const CovariateDistribution& dist);

/// Standardized inferential efficiency Psi_I in [0,1]; equals 1 exactly at
/// the jointly balanced allocation. C1 and C2 share the product form
/// 4^K prod pi(1-pi); the trace criteria use the ratio of expected values.
double inferential_efficiency(CriterionId id, const DesignSpace& space,
                              const AllocationVector& pi, const CovariateDistribution& dist);

/// Standardized efficiencies. psi_e is empty when E|theta| = 0 (no ethical
/// differential; the comparison degenerates).
struct EfficiencyPair {
  std::optional<double> psi_e;
  double psi_i = 0.0;
};

EfficiencyPair efficiencies(CriterionId id, const DesignSpace& space,
                            const AllocationVector& pi, const Eigen::VectorXd& theta,
                            const CovariateDistribution& dist);

/// Stratum weights of the trace criteria: (J+1)(L+1) on the reference cell,
/// L+1 on (j,0), J+1 on (0,l), 1 on interior cells; the reference-cell
/// weight drops by one for C4/C5.
Eigen::VectorXd trace_criterion_weights(CriterionId id, const DesignSpace& space);

}  // namespace rdbcd
