#include "rdbcd/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rdbcd {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& node, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& item : node.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("config error at " + path + ": unknown key '" + item.key() + "'");
    }
  }
}

double require_number(const json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) throw ConfigError("config error at " + path + ": missing '" + key + "'");
  if (!node[key].is_number()) {
    throw ConfigError("config error at " + path + "/" + key + ": expected a number");
  }
  return node[key].get<double>();
}

int require_int(const json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) throw ConfigError("config error at " + path + ": missing '" + key + "'");
  if (!node[key].is_number_integer()) {
    throw ConfigError("config error at " + path + "/" + key + ": expected an integer");
  }
  return node[key].get<int>();
}

Eigen::VectorXd require_vector(const json& node, const std::string& key,
                               const std::string& path) {
  if (!node.contains(key)) throw ConfigError("config error at " + path + ": missing '" + key + "'");
  if (!node[key].is_array()) {
    throw ConfigError("config error at " + path + "/" + key + ": expected an array");
  }
  Eigen::VectorXd v(node[key].size());
  Eigen::Index i = 0;
  for (const auto& x : node[key]) {
    if (!x.is_number()) {
      throw ConfigError("config error at " + path + "/" + key + ": expected numbers");
    }
    v(i++) = x.get<double>();
  }
  return v;
}

WeightSpec parse_weight(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError("config error at " + path + ": expected an object");
  if (!node.contains("kind")) throw ConfigError("config error at " + path + ": missing 'kind'");
  const std::string kind = node["kind"].get<std::string>();
  try {
    if (kind == "constant") {
      reject_unknown_keys(node, {"kind", "omega"}, path);
      return WeightSpec::constant(require_number(node, "omega", path));
    }
    if (kind == "s_shaped") {
      reject_unknown_keys(node, {"kind", "s"}, path);
      return WeightSpec::s_shaped(require_number(node, "s", path));
    }
    if (kind == "chi_square_cdf") {
      reject_unknown_keys(node, {"kind", "df"}, path);
      return WeightSpec::chi_square(require_number(node, "df", path));
    }
    if (kind == "thresholded") {
      reject_unknown_keys(node, {"kind", "threshold", "inner"}, path);
      if (!node.contains("inner")) {
        throw ConfigError("config error at " + path + ": missing 'inner'");
      }
      return WeightSpec::thresholded(require_number(node, "threshold", path),
                                     parse_weight(node["inner"], path + "/inner"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config error at " + path + ": " + e.what());
  }
  throw ConfigError("config error at " + path + ": unknown weight kind '" + kind + "'");
}

json weight_to_json(const WeightSpec& spec) {
  json node;
  switch (spec.kind) {
    case WeightSpec::Kind::constant:
      node = {{"kind", "constant"}, {"omega", spec.parameter}};
      break;
    case WeightSpec::Kind::s_shaped:
      node = {{"kind", "s_shaped"}, {"s", spec.parameter}};
      break;
    case WeightSpec::Kind::chi_square_cdf:
      node = {{"kind", "chi_square_cdf"}, {"df", spec.parameter}};
      break;
    case WeightSpec::Kind::thresholded:
      node = {{"kind", "thresholded"},
              {"threshold", spec.parameter},
              {"inner", weight_to_json(*spec.inner)}};
      break;
  }
  return node;
}

RuleSpec parse_rule(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError("config error at " + path + ": expected an object");
  if (!node.contains("kind")) throw ConfigError("config error at " + path + ": missing 'kind'");
  const std::string kind = node["kind"].get<std::string>();
  RuleSpec spec;
  if (kind == "zhang_cara") {
    reject_unknown_keys(node, {"kind"}, path);
    spec.kind = RandomizationRule::Kind::zhang_cara;
  } else if (kind == "baz1") {
    reject_unknown_keys(node, {"kind", "k"}, path);
    spec.kind = RandomizationRule::Kind::baz1;
    spec.parameter = require_number(node, "k", path);
  } else if (kind == "baz2") {
    reject_unknown_keys(node, {"kind", "epsilon"}, path);
    spec.kind = RandomizationRule::Kind::baz2;
    spec.parameter = require_number(node, "epsilon", path);
  } else if (kind == "erade") {
    reject_unknown_keys(node, {"kind", "rho"}, path);
    spec.kind = RandomizationRule::Kind::erade;
    spec.parameter = require_number(node, "rho", path);
  } else if (kind == "atkinson_da") {
    reject_unknown_keys(node, {"kind"}, path);
    spec.kind = RandomizationRule::Kind::atkinson_da;
  } else {
    throw ConfigError("config error at " + path + ": unknown rule kind '" + kind + "'");
  }
  return spec;
}

json rule_to_json(const RuleSpec& spec) {
  switch (spec.kind) {
    case RandomizationRule::Kind::zhang_cara: return {{"kind", "zhang_cara"}};
    case RandomizationRule::Kind::baz1: return {{"kind", "baz1"}, {"k", spec.parameter}};
    case RandomizationRule::Kind::baz2: return {{"kind", "baz2"}, {"epsilon", spec.parameter}};
    case RandomizationRule::Kind::erade: return {{"kind", "erade"}, {"rho", spec.parameter}};
    case RandomizationRule::Kind::atkinson_da: return {{"kind", "atkinson_da"}};
    default: break;
  }
  throw ConfigError("rule kind not serializable");
}

}  // namespace

RandomizationRule RuleSpec::build(const DesignSpace& space) const {
  switch (kind) {
    case RandomizationRule::Kind::zhang_cara: return RandomizationRule::zhang_cara();
    case RandomizationRule::Kind::baz1: return RandomizationRule::baz1(parameter);
    case RandomizationRule::Kind::baz2:
      return RandomizationRule::baz2(parameter, space.strata_count());
    case RandomizationRule::Kind::erade: return RandomizationRule::erade(parameter);
    case RandomizationRule::Kind::atkinson_da: return RandomizationRule::atkinson_da();
    default: break;
  }
  throw ConfigError("rule kind not buildable from a config document");
}

std::string RuleSpec::kind_name() const {
  switch (kind) {
    case RandomizationRule::Kind::zhang_cara: return "zhang_cara";
    case RandomizationRule::Kind::baz1: return "baz1";
    case RandomizationRule::Kind::baz2: return "baz2";
    case RandomizationRule::Kind::erade: return "erade";
    case RandomizationRule::Kind::atkinson_da: return "atkinson_da";
    case RandomizationRule::Kind::custom_family: return "custom_family";
    case RandomizationRule::Kind::custom: return "custom";
  }
  return "?";
}

SimulationConfig RunConfig::simulation() const {
  SimulationConfig sim;
  sim.space = space();
  sim.truth = model;
  sim.covariates = covariates();
  sim.criterion = criterion;
  sim.weight = weight;
  sim.rule = rule.build(sim.space);
  sim.horizon = this->sim.horizon;
  sim.initial_per_arm = this->sim.initial_per_arm;
  sim.replicates = this->sim.replicates;
  sim.master_seed = this->sim.seed;
  sim.checkpoint_count = this->sim.checkpoint_count;
  sim.checkpoints = this->sim.checkpoints;
  sim.threads = this->sim.threads;
  sim.validate();
  return sim;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number for the diagnostic
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config error: top level must be an object");

  reject_unknown_keys(doc,
                      {"schema_version", "design", "model", "covariates", "criterion",
                       "weight", "rule", "sim", "constrained", "output"},
                      "/");

  RunConfig cfg;
  if (!doc.contains("schema_version")) throw ConfigError("config error: missing 'schema_version'");
  cfg.schema_version = require_int(doc, "schema_version", "/");
  if (cfg.schema_version != 1) {
    throw ConfigError("config error: unsupported schema_version " +
                      std::to_string(cfg.schema_version));
  }

  if (!doc.contains("design")) throw ConfigError("config error: missing 'design'");
  reject_unknown_keys(doc["design"], {"t_levels", "w_levels"}, "/design");
  cfg.t_levels = require_int(doc["design"], "t_levels", "/design");
  cfg.w_levels = require_int(doc["design"], "w_levels", "/design");
  DesignSpace space(cfg.t_levels, cfg.w_levels);

  if (!doc.contains("model")) throw ConfigError("config error: missing 'model'");
  const json& model = doc["model"];
  if (model.contains("gamma")) {
    reject_unknown_keys(model, {"gamma", "sigma2"}, "/model");
    const json& gamma = model["gamma"];
    reject_unknown_keys(gamma, {"mu_a", "mu_b", "beta_a", "beta_b"}, "/model/gamma");
    cfg.model.mu_a = require_number(gamma, "mu_a", "/model/gamma");
    cfg.model.mu_b = require_number(gamma, "mu_b", "/model/gamma");
    cfg.model.beta_a = require_vector(gamma, "beta_a", "/model/gamma");
    cfg.model.beta_b = require_vector(gamma, "beta_b", "/model/gamma");
  } else {
    reject_unknown_keys(model, {"alpha", "tau", "mu_b", "beta_b", "sigma2"}, "/model");
    const double alpha = require_number(model, "alpha", "/model");
    const Eigen::VectorXd tau = require_vector(model, "tau", "/model");
    cfg.model.mu_b = model.contains("mu_b") ? require_number(model, "mu_b", "/model") : 0.0;
    cfg.model.beta_b = model.contains("beta_b") ? require_vector(model, "beta_b", "/model")
                                                : Eigen::VectorXd::Zero(tau.size());
    cfg.model.mu_a = cfg.model.mu_b + alpha;
    cfg.model.beta_a = cfg.model.beta_b + tau;
  }
  cfg.model.sigma2 = require_number(model, "sigma2", "/model");
  try {
    cfg.model.validate(space);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at /model: ") + e.what());
  }

  cfg.covariate_p = require_vector(doc, "covariates", "/");
  try {
    CovariateDistribution{cfg.covariate_p}.validate(space);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at /covariates: ") + e.what());
  }

  if (!doc.contains("criterion")) throw ConfigError("config error: missing 'criterion'");
  try {
    cfg.criterion = parse_criterion(doc["criterion"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at /criterion: ") + e.what());
  }

  if (!doc.contains("weight")) throw ConfigError("config error: missing 'weight'");
  cfg.weight = parse_weight(doc["weight"], "/weight");

  if (doc.contains("rule")) cfg.rule = parse_rule(doc["rule"], "/rule");

  if (doc.contains("sim")) {
    const json& sim = doc["sim"];
    reject_unknown_keys(sim, {"n", "m", "replicates", "seed", "checkpoints", "threads"},
                        "/sim");
    cfg.sim.horizon = require_int(sim, "n", "/sim");
    cfg.sim.initial_per_arm = require_int(sim, "m", "/sim");
    if (sim.contains("replicates")) cfg.sim.replicates = require_int(sim, "replicates", "/sim");
    if (sim.contains("seed")) {
      if (!sim["seed"].is_number_unsigned() && !sim["seed"].is_number_integer()) {
        throw ConfigError("config error at /sim/seed: expected an integer");
      }
      cfg.sim.seed = sim["seed"].get<std::uint64_t>();
    }
    if (sim.contains("threads")) cfg.sim.threads = require_int(sim, "threads", "/sim");
    if (sim.contains("checkpoints")) {
      if (sim["checkpoints"].is_number_integer()) {
        cfg.sim.checkpoint_count = sim["checkpoints"].get<int>();
      } else if (sim["checkpoints"].is_array()) {
        for (const auto& c : sim["checkpoints"]) {
          if (!c.is_number_integer()) {
            throw ConfigError("config error at /sim/checkpoints: expected integers");
          }
          cfg.sim.checkpoints.push_back(c.get<int>());
        }
      } else {
        throw ConfigError("config error at /sim/checkpoints: expected a count or a list");
      }
    }
  }

  if (doc.contains("constrained")) {
    reject_unknown_keys(doc["constrained"], {"efficiency_floor"}, "/constrained");
    const double c = require_number(doc["constrained"], "efficiency_floor", "/constrained");
    if (!(c > 0.0) || !(c < 1.0)) {
      throw ConfigError("config error at /constrained/efficiency_floor: must lie in (0,1)");
    }
    cfg.efficiency_floor = c;
  }

  if (doc.contains("output")) {
    reject_unknown_keys(doc["output"], {"dir"}, "/output");
    if (doc["output"].contains("dir")) cfg.out_dir = doc["output"]["dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["schema_version"] = cfg.schema_version;
  doc["design"] = {{"t_levels", cfg.t_levels}, {"w_levels", cfg.w_levels}};
  doc["model"] = {
      {"gamma",
       {{"mu_a", cfg.model.mu_a},
        {"mu_b", cfg.model.mu_b},
        {"beta_a", std::vector<double>(cfg.model.beta_a.begin(), cfg.model.beta_a.end())},
        {"beta_b", std::vector<double>(cfg.model.beta_b.begin(), cfg.model.beta_b.end())}}},
      {"sigma2", cfg.model.sigma2}};
  doc["covariates"] = std::vector<double>(cfg.covariate_p.begin(), cfg.covariate_p.end());
  doc["criterion"] = to_string(cfg.criterion);
  doc["weight"] = weight_to_json(cfg.weight);
  doc["rule"] = rule_to_json(cfg.rule);
  json sim = {{"n", cfg.sim.horizon},
              {"m", cfg.sim.initial_per_arm},
              {"replicates", cfg.sim.replicates},
              {"seed", cfg.sim.seed},
              {"threads", cfg.sim.threads}};
  if (!cfg.sim.checkpoints.empty()) {
    sim["checkpoints"] = cfg.sim.checkpoints;
  } else if (cfg.sim.checkpoint_count > 0) {
    sim["checkpoints"] = cfg.sim.checkpoint_count;
  }
  doc["sim"] = sim;
  if (cfg.efficiency_floor) {
    doc["constrained"] = {{"efficiency_floor", *cfg.efficiency_floor}};
  }
  if (!cfg.out_dir.empty()) doc["output"] = {{"dir", cfg.out_dir}};
  return doc.dump(2);
}

}  // namespace rdbcd
