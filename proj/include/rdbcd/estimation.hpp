#pragma once

#include <Eigen/Core>

#include <vector>

#include "rdbcd/criteria.hpp"
#include "rdbcd/design_space.hpp"
#include "rdbcd/targets.hpp"
#include "rdbcd/weights.hpp"

namespace rdbcd {

struct SubjectRecord {
  Profile profile;
  bool assigned_a = false;
  double response = 0.0;
};

/// Per-subject trial history in arrival order.
using TrialHistory = std::vector<SubjectRecord>;

struct OlsResult {
  ModelParams gamma_hat;  ///< sigma2 holds the residual mean square
  bool estimable = false; ///< X^t X numerically nonsingular
};

/// Incremental least squares for the response model. Accumulates per-cell
/// (stratum x arm) sufficient statistics, so adding a subject is O(1) and
/// the solve assembles the normal equations from counts and response sums.
class SequentialOls {
 public:
  explicit SequentialOls(const DesignSpace& space);

  void add(const Profile& profile, bool assigned_a, double response);
  int count() const { return n_; }

  /// Minimum-norm least-squares solution of the normal equations. The
  /// estimable flag reports whether X^t X is nonsingular at relative pivot
  /// tolerance 1e-10; when it is not, the minimum-norm solution is still
  /// returned with the flag cleared.
  OlsResult solve() const;

  /// Per-stratum subject counts seen so far.
  StratumCounts counts() const;

 private:
  DesignSpace space_;
  std::vector<Eigen::VectorXd> cell_x_;  // model row per (stratum, arm)
  Eigen::VectorXd cell_count_;
  Eigen::VectorXd cell_ysum_;
  double yy_ = 0.0;
  int n_ = 0;
};

/// Least squares over a full history (wrapper over SequentialOls).
/// Requires a nonempty history.
OlsResult ols_estimate(const DesignSpace& space, const TrialHistory& history);

/// Relative stratum frequencies clamped below and renormalized: clamped
/// entries sit exactly at the floor and the remaining mass is scaled.
/// Requires a nonempty history.
CovariateDistribution empirical_distribution(const DesignSpace& space,
                                             const TrialHistory& history,
                                             double clamp_floor = 1e-6);
CovariateDistribution empirical_distribution(const DesignSpace& space,
                                             const StratumCounts& counts,
                                             double clamp_floor = 1e-6);

/// Why a plug-in target fell back to the balanced allocation.
enum class TargetFallback { none, not_estimable, solver_error };

/// Everything the randomization step needs from the data so far.
struct EstimateSnapshot {
  ModelParams gamma_hat;
  CovariateDistribution p_hat;
  bool estimable = false;
  AllocationVector target_hat;
  TargetFallback target_fallback = TargetFallback::none;
};

/// Compound target at the plugged-in estimates (theta(gamma_hat), p_hat).
/// Falls back to the balanced allocation, with the reason reported, when
/// the model is not estimable or the target solve fails.
AllocationVector plug_in_target(CriterionId id, const DesignSpace& space,
                                const OlsResult& ols, const CovariateDistribution& p_hat,
                                const WeightSpec& spec, TargetFallback* fallback = nullptr);

/// Snapshot from an accumulated fit: estimates, clamped frequencies, and
/// the plug-in target.
EstimateSnapshot estimate_snapshot(CriterionId id, const DesignSpace& space,
                                   const SequentialOls& fit, const WeightSpec& spec,
                                   double clamp_floor = 1e-6);

}  // namespace rdbcd
