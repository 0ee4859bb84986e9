#include "rdbcd/golden.hpp"

#include <stdexcept>

namespace rdbcd::golden {

DesignSpace binary_space() { return DesignSpace(1, 1); }

CovariateDistribution distribution(bool uniform) {
  Eigen::VectorXd p(4);
  if (uniform) {
    p << 0.25, 0.25, 0.25, 0.25;
  } else {
    p << 0.2, 0.3, 0.4, 0.1;
  }
  return CovariateDistribution{p};
}

ModelParams model_params(bool first_params) {
  ModelParams m;
  m.mu_b = 0.0;
  m.beta_b = Eigen::VectorXd::Zero(3);
  if (first_params) {
    m.mu_a = 1.0;
    m.beta_a = Eigen::Vector3d(1.0, 1.0, 1.0);
  } else {
    m.mu_a = -4.0;
    m.beta_a = Eigen::Vector3d(-1.0, 3.0, 3.0);
  }
  m.sigma2 = 1.0;
  return m;
}

Eigen::VectorXd theta_of(bool first_params) {
  return theta_surface(binary_space(), model_params(first_params));
}

WeightSpec weight_by_name(const std::string& name) {
  if (name == "chi2_1") return WeightSpec::chi_square(1.0);
  if (name == "chi2_2") return WeightSpec::chi_square(2.0);
  if (name == "s_1") return WeightSpec::s_shaped(1.0);
  if (name == "s_2") return WeightSpec::s_shaped(2.0);
  throw std::invalid_argument("unknown weight name '" + name + "'");
}

RandomizationRule rule_by_name(const std::string& name, const DesignSpace& space) {
  if (name == "zhang_cara") return RandomizationRule::zhang_cara();
  if (name == "baz1") return RandomizationRule::baz1(1.0);
  if (name == "baz2") return RandomizationRule::baz2(2.0 / 3.0, space.strata_count());
  if (name == "erade") return RandomizationRule::erade(2.0 / 3.0);
  throw std::invalid_argument("unknown rule name '" + name + "'");
}

const std::vector<TargetRow>& target_rows() {
  static const std::vector<TargetRow> rows = [] {
    struct Block {
      int table;
      CriterionId id;
      // per weight (chi2_1, chi2_2, s_1, s_2): NU th1, NU th2, U th1, U th2
      std::array<std::array<double, 4>, 16> values;
    };
    const std::vector<Block> blocks = {
        {1,
         CriterionId::C1,
         {{{0.578, 0.700, 0.743, 0.646}, {0.278, 0.186, 0.371, 0.534},
           {0.593, 0.670, 0.670, 0.771}, {0.242, 0.209, 0.415, 0.585},
           {0.544, 0.623, 0.660, 0.587}, {0.352, 0.264, 0.421, 0.520},
           {0.554, 0.605, 0.605, 0.689}, {0.319, 0.287, 0.449, 0.551},
           {0.537, 0.606, 0.637, 0.572}, {0.353, 0.265, 0.421, 0.520},
           {0.549, 0.596, 0.596, 0.674}, {0.321, 0.289, 0.449, 0.551},
           {0.521, 0.562, 0.581, 0.541}, {0.397, 0.324, 0.447, 0.513},
           {0.530, 0.559, 0.559, 0.614}, {0.373, 0.346, 0.466, 0.534}}}},
        {2,
         CriterionId::C3,
         {{{0.658, 0.868, 0.900, 0.805}, {0.179, 0.077, 0.128, 0.677},
           {0.697, 0.835, 0.835, 0.916}, {0.154, 0.099, 0.214, 0.846},
           {0.572, 0.792, 0.841, 0.706}, {0.277, 0.125, 0.205, 0.582},
           {0.598, 0.745, 0.745, 0.866}, {0.241, 0.158, 0.318, 0.759},
           {0.557, 0.767, 0.821, 0.678}, {0.279, 0.126, 0.206, 0.581},
           {0.586, 0.728, 0.728, 0.856}, {0.243, 0.159, 0.320, 0.757},
           {0.530, 0.696, 0.760, 0.610}, {0.346, 0.169, 0.268, 0.546},
           {0.548, 0.658, 0.658, 0.806}, {0.308, 0.210, 0.382, 0.692}}}},
        {3,
         CriterionId::C4,
         {{{0.677, 0.860, 0.895, 0.795}, {0.166, 0.082, 0.137, 0.663},
           {0.717, 0.827, 0.827, 0.912}, {0.142, 0.105, 0.225, 0.837},
           {0.585, 0.782, 0.833, 0.694}, {0.259, 0.133, 0.217, 0.573},
           {0.615, 0.734, 0.734, 0.859}, {0.223, 0.167, 0.331, 0.747},
           {0.567, 0.756, 0.812, 0.666}, {0.261, 0.134, 0.218, 0.572},
           {0.601, 0.717, 0.717, 0.849}, {0.225, 0.169, 0.333, 0.744},
           {0.536, 0.685, 0.749, 0.601}, {0.328, 0.179, 0.282, 0.541},
           {0.558, 0.645, 0.645, 0.797}, {0.289, 0.221, 0.393, 0.679}}}},
    };
    const char* weight_names[4] = {"chi2_1", "chi2_2", "s_1", "s_2"};
    std::vector<TargetRow> out;
    for (const auto& block : blocks) {
      int idx = 0;
      for (const char* wname : weight_names) {
        for (bool uniform : {false, true}) {
          for (bool first_params : {true, false}) {
            out.push_back(TargetRow{block.table, block.id, wname, uniform, first_params,
                                    block.values[idx]});
            ++idx;
          }
        }
      }
    }
    return out;
  }();
  return rows;
}

const std::vector<ConstrainedRow>& constrained_rows() {
  static const std::vector<ConstrainedRow> rows = {
      {0.95, 0.356, {0.523, 0.546, 0.546, 0.589}, 0.56},
      {0.90, 0.483, {0.528, 0.566, 0.566, 0.612}, 0.59},
      {0.75, 0.700, {0.558, 0.612, 0.612, 0.698}, 0.64},
      {0.50, 0.883, {0.599, 0.679, 0.679, 0.781}, 0.72},
      {0.25, 0.969, {0.656, 0.756, 0.756, 0.851}, 0.79},
  };
  return rows;
}

const std::vector<ComparatorRow>& comparator_rows() {
  static const std::vector<ComparatorRow> rows = {
      {1.0, {0.841, 0.977, 0.977, 0.999}, 0.97, 1e-6},
      {2.0, {0.691, 0.841, 0.841, 0.977}, 0.88, 0.02},
      {3.0, {0.631, 0.748, 0.748, 0.909}, 0.81, 0.17},
  };
  return rows;
}

const std::vector<SimulationCell>& simulation_cells() {
  static const std::vector<SimulationCell> cells = {
      // table 4: uniform distribution, (alpha, tau) = (1,(1,1,1))
      {4, true, true, "zhang_cara", {0.592, 0.667, 0.666, 0.764}, {0.051, 0.049, 0.045, 0.041}},
      {4, true, true, "baz1", {0.592, 0.667, 0.670, 0.768}, {0.027, 0.027, 0.026, 0.025}},
      {4, true, true, "baz2", {0.591, 0.668, 0.669, 0.769}, {0.017, 0.016, 0.016, 0.014}},
      {4, true, true, "erade", {0.589, 0.665, 0.666, 0.764}, {0.019, 0.019, 0.019, 0.018}},
      // table 5: uniform distribution, (alpha, tau) = (-4,(-1,3,3))
      {5, true, false, "zhang_cara", {0.250, 0.217, 0.416, 0.582}, {0.042, 0.041, 0.049, 0.050}},
      {5, true, false, "baz1", {0.244, 0.211, 0.412, 0.585}, {0.024, 0.022, 0.024, 0.026}},
      {5, true, false, "baz2", {0.244, 0.212, 0.415, 0.585}, {0.013, 0.013, 0.017, 0.016}},
      {5, true, false, "erade", {0.251, 0.217, 0.417, 0.584}, {0.017, 0.016, 0.018, 0.019}},
      // table 6: skewed distribution, (alpha, tau) = (1,(1,1,1))
      {6, false, true, "zhang_cara", {0.576, 0.696, 0.732, 0.651}, {0.054, 0.041, 0.034, 0.071}},
      {6, false, true, "baz1", {0.577, 0.699, 0.739, 0.646}, {0.026, 0.025, 0.024, 0.028}},
      {6, false, true, "baz2", {0.577, 0.698, 0.740, 0.646}, {0.017, 0.015, 0.014, 0.017}},
      {6, false, true, "erade", {0.576, 0.694, 0.738, 0.640}, {0.021, 0.018, 0.014, 0.030}},
      // table 7: skewed distribution, (alpha, tau) = (-4,(-1,3,3))
      {7, false, false, "zhang_cara", {0.284, 0.197, 0.377, 0.539}, {0.050, 0.041, 0.035, 0.073}},
      {7, false, false, "baz1", {0.279, 0.188, 0.373, 0.535}, {0.026, 0.021, 0.026, 0.024}},
      {7, false, false, "baz2", {0.280, 0.189, 0.373, 0.534}, {0.015, 0.015, 0.013, 0.013}},
      {7, false, false, "erade", {0.286, 0.195, 0.375, 0.533}, {0.019, 0.018, 0.014, 0.023}},
  };
  return cells;
}

SimulationConfig simulation_config(const SimulationCell& cell, int replicates, int threads,
                                   std::uint64_t seed) {
  SimulationConfig config;
  config.space = binary_space();
  config.truth = model_params(cell.first_params);
  config.covariates = distribution(cell.uniform);
  config.criterion = CriterionId::C1;
  config.weight = WeightSpec::chi_square(1.0);
  config.rule = rule_by_name(cell.rule_name, config.space);
  config.horizon = 500;
  config.initial_per_arm = 4;
  config.replicates = replicates;
  config.master_seed = seed;
  config.threads = threads;
  return config;
}

}  // namespace rdbcd::golden
