#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "rdbcd/criteria.hpp"
#include "rdbcd/design_space.hpp"
#include "rdbcd/estimation.hpp"
#include "rdbcd/randomization.hpp"
#include "rdbcd/targets.hpp"
#include "rdbcd/weights.hpp"

namespace rdbcd {

/// Full description of a simulated trial. Subjects arrive with i.i.d.
/// profiles from `covariates`; the first 2m are assigned in randomized
/// permuted pairs (one A and one B per pair, covariates ignored), and every
/// later subject is randomized by the rule at the current stratum
/// proportion, plug-in target and stratum-probability estimate. Responses
/// are normal with the model mean and variance sigma2; estimates refresh
/// with every subject.
struct SimulationConfig {
  DesignSpace space{1, 1};
  ModelParams truth;
  CovariateDistribution covariates;
  CriterionId criterion = CriterionId::C1;
  WeightSpec weight;
  RandomizationRule rule = RandomizationRule::zhang_cara();
  int horizon = 500;          ///< n
  int initial_per_arm = 4;    ///< m
  int replicates = 500;       ///< h
  std::uint64_t master_seed = 0;
  int checkpoint_count = 20;  ///< evenly spaced trajectory checkpoints (0 = none)
  std::vector<int> checkpoints;  ///< explicit checkpoint subjects (overrides count)
  double p_clamp_floor = 1e-6;
  bool use_true_parameters = false;  ///< diagnostic mode: target from the truth
  int threads = 0;            ///< replicate parallelism; 0 = hardware

  void validate() const;
  std::vector<int> checkpoint_schedule() const;
};

struct TrajectoryPoint {
  int n = 0;
  Eigen::VectorXi subjects;
  Eigen::VectorXi on_a;
  AllocationVector target_hat;
};

struct ReplicateResult {
  Eigen::VectorXi subjects;
  Eigen::VectorXi on_a;
  ModelParams gamma_hat;
  bool estimable = false;
  AllocationVector final_target_hat;
  int not_estimable_fallbacks = 0;     ///< balanced assignments before estimability
  int solver_failure_fallbacks = 0;    ///< balanced assignments after a solver error
  std::vector<TrajectoryPoint> trajectory;

  /// on_a/subjects per stratum; NaN where a stratum stayed empty.
  AllocationVector proportions() const;
};

ReplicateResult run_replicate(const SimulationConfig& config, int replicate_index);

struct AggregateReport {
  int replicates = 0;
  int horizon = 0;
  AllocationVector true_target;        ///< compound target of the truth
  AllocationVector mean_proportion;    ///< per stratum over replicates
  AllocationVector sd_proportion;
  AllocationVector mean_target_hat;
  AllocationVector sd_target_hat;
  Eigen::VectorXi empty_stratum_replicates;
  double mean_gamma_max_error = 0.0;   ///< mean over replicates of max |gamma_hat - gamma|
  double mean_target_max_error = 0.0;  ///< mean of max |final target_hat - true target|
  long long total_not_estimable_fallbacks = 0;
  long long total_solver_failures = 0;
};

/// Runs all replicates (in parallel when configured) and aggregates.
/// Replicate r uses the stream seeded by replicate_seed(master_seed, r),
/// so the report is bit-identical for a fixed config and seed regardless
/// of thread count.
AggregateReport run_study(const SimulationConfig& config);

/// Collects per-replicate results (same seeding contract as run_study).
std::vector<ReplicateResult> run_replicates(const SimulationConfig& config);
AggregateReport aggregate(const SimulationConfig& config,
                          const std::vector<ReplicateResult>& results);

struct AsymptoticInformation {
  Eigen::MatrixXd matrix;   ///< limit of the per-observation information matrix
  Eigen::MatrixXd inverse;  ///< asymptotic covariance of sqrt(n)(gamma_hat - gamma) / sigma2
};

/// Limit information matrix at a fixed interior allocation, assembled from
/// its block structure (marginal allocation-mass vectors and their
/// diagonal/cross blocks). Throws std::runtime_error when the matrix is
/// numerically singular.
AsymptoticInformation asymptotic_information(const DesignSpace& space,
                                             const AllocationVector& pi_star,
                                             const CovariateDistribution& dist);

struct CheckpointSummary {
  int n = 0;
  double median_proportion_dev = 0.0;  ///< median over replicates of max-stratum |pi_n - pi*|
  double median_target_dev = 0.0;      ///< same for |target_hat - pi*|
};

struct ConvergenceDiagnostics {
  std::vector<CheckpointSummary> checkpoints;
  /// Fraction of consecutive checkpoint pairs with decreasing median
  /// deviation (1 = monotone trend).
  double proportion_trend = 0.0;
  double target_trend = 0.0;
  /// Fraction of replicates whose final target deviation is no larger than
  /// their first-checkpoint deviation.
  double improved_fraction = 0.0;
};

/// Requires trajectories recorded with a common checkpoint schedule.
ConvergenceDiagnostics convergence_diagnostics(const std::vector<ReplicateResult>& results,
                                               const AllocationVector& pi_star);

}  // namespace rdbcd
