#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdbcd/criteria.hpp"
#include "rdbcd/design_space.hpp"
#include "rdbcd/randomization.hpp"
#include "rdbcd/trial.hpp"
#include "rdbcd/weights.hpp"

namespace rdbcd {

/// Raised on malformed configuration documents; the message carries the
/// JSON path (and the input line for parse errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serializable description of a randomization rule.
struct RuleSpec {
  RandomizationRule::Kind kind = RandomizationRule::Kind::zhang_cara;
  double parameter = 0.0;  // k, epsilon or rho

  RandomizationRule build(const DesignSpace& space) const;
  std::string kind_name() const;
};

struct SimSettings {
  int horizon = 500;
  int initial_per_arm = 4;
  int replicates = 500;
  std::uint64_t seed = 0;
  int checkpoint_count = 20;
  std::vector<int> checkpoints;
  int threads = 0;
};

/// Parsed, schema-validated run configuration. Unknown keys anywhere in the
/// document are rejected; "schema_version" is mandatory.
struct RunConfig {
  int schema_version = 1;
  int t_levels = 1;
  int w_levels = 1;
  ModelParams model;
  Eigen::VectorXd covariate_p;
  CriterionId criterion = CriterionId::C1;
  WeightSpec weight;
  RuleSpec rule;
  SimSettings sim;
  std::optional<double> efficiency_floor;
  std::string out_dir;

  DesignSpace space() const { return DesignSpace(t_levels, w_levels); }
  CovariateDistribution covariates() const { return CovariateDistribution{covariate_p}; }
  SimulationConfig simulation() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string config_to_json(const RunConfig& config);

}  // namespace rdbcd
