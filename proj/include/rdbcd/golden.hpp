#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rdbcd/config.hpp"
#include "rdbcd/criteria.hpp"
#include "rdbcd/design_space.hpp"
#include "rdbcd/randomization.hpp"
#include "rdbcd/trial.hpp"
#include "rdbcd/weights.hpp"

namespace rdbcd::golden {

/// Reference scenarios: two binary covariates, two parameter sets
/// ((alpha, tau) = (1,(1,1,1)) and (-4,(-1,3,3)), zero baselines,
/// sigma2 = 1) and two covariate distributions (uniform and the skewed
/// (0.2, 0.3, 0.4, 0.1)).
DesignSpace binary_space();
CovariateDistribution distribution(bool uniform);
ModelParams model_params(bool first_params);
Eigen::VectorXd theta_of(bool first_params);
WeightSpec weight_by_name(const std::string& name);
RandomizationRule rule_by_name(const std::string& name, const DesignSpace& space);

/// One row of the deterministic target tables (tables 1-3: criteria
/// C1-C2, C3, C4-C5), with the expected per-stratum targets.
struct TargetRow {
  int table;
  CriterionId criterion;
  const char* weight_name;
  bool uniform;
  bool first_params;
  std::array<double, 4> expected_pi;
};
const std::vector<TargetRow>& target_rows();

/// Constrained-target rows (efficiency floor, matching constant weight,
/// targets and ethical efficiency).
struct ConstrainedRow {
  double floor;
  double expected_omega;
  std::array<double, 4> expected_pi;
  double expected_psi_e;
};
const std::vector<ConstrainedRow>& constrained_rows();

/// Normal-cdf comparator rows (targets at scale T with their efficiencies).
struct ComparatorRow {
  double t_scale;
  std::array<double, 4> expected_pi;
  double expected_psi_e;
  double expected_psi_i;
};
const std::vector<ComparatorRow>& comparator_rows();

/// One scenario x rule cell of the stochastic tables (tables 4-7):
/// criterion C1, chi-square(1) weight, n = 500, m = 4, h = 500.
struct SimulationCell {
  int table;
  bool uniform;
  bool first_params;
  const char* rule_name;
  std::array<double, 4> expected_mean;
  std::array<double, 4> expected_sd;
};
const std::vector<SimulationCell>& simulation_cells();

inline constexpr std::uint64_t kStudySeed = 987654321;

SimulationConfig simulation_config(const SimulationCell& cell, int replicates, int threads,
                                   std::uint64_t seed = kStudySeed);

}  // namespace rdbcd::golden
