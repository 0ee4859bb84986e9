#include <doctest.h>

#include <string>

#include "rdbcd/config.hpp"
#include "rdbcd/table_io.hpp"

using namespace rdbcd;

namespace {

const char* kReference = R"({
  "schema_version": 1,
  "design": {"t_levels": 1, "w_levels": 1},
  "model": {"alpha": 1.0, "tau": [1, 1, 1], "sigma2": 1.0},
  "covariates": [0.25, 0.25, 0.25, 0.25],
  "criterion": "C1",
  "weight": {"kind": "chi_square_cdf", "df": 1},
  "rule": {"kind": "baz2", "epsilon": 0.5},
  "sim": {"n": 500, "m": 4, "replicates": 500, "seed": 20120911},
  "constrained": {"efficiency_floor": 0.5},
  "output": {"dir": "out"}
})";

}  // namespace

TEST_CASE("configs round-trip through serialization") {
  const RunConfig first = parse_config_text(kReference);
  const std::string serialized = config_to_json(first);
  const RunConfig second = parse_config_text(serialized);
  CHECK(config_to_json(second) == serialized);

  CHECK(second.criterion == CriterionId::C1);
  CHECK(second.model.mu_a == 1.0);
  CHECK(second.model.mu_b == 0.0);
  CHECK(second.model.beta_a.isApprox(Eigen::Vector3d(1, 1, 1)));
  CHECK(second.model.beta_b.isZero(0.0));
  CHECK(second.weight.kind == WeightSpec::Kind::chi_square_cdf);
  CHECK(second.rule.kind == RandomizationRule::Kind::baz2);
  CHECK(second.sim.seed == 20120911);
  CHECK(second.efficiency_floor == 0.5);
  CHECK(second.out_dir == "out");
}

TEST_CASE("gamma form and alpha/tau form agree") {
  const RunConfig alpha_form = parse_config_text(R"({
    "schema_version": 1,
    "design": {"t_levels": 1, "w_levels": 1},
    "model": {"alpha": -4.0, "tau": [-1, 3, 3], "mu_b": 0.5, "beta_b": [1, 0, 0], "sigma2": 2.0},
    "covariates": [0.2, 0.3, 0.4, 0.1],
    "criterion": "C4",
    "weight": {"kind": "s_shaped", "s": 2}
  })");
  const RunConfig gamma_form = parse_config_text(R"({
    "schema_version": 1,
    "design": {"t_levels": 1, "w_levels": 1},
    "model": {"gamma": {"mu_a": -3.5, "mu_b": 0.5, "beta_a": [0, 3, 3], "beta_b": [1, 0, 0]},
              "sigma2": 2.0},
    "covariates": [0.2, 0.3, 0.4, 0.1],
    "criterion": "C4",
    "weight": {"kind": "s_shaped", "s": 2}
  })");
  CHECK(config_to_json(alpha_form) == config_to_json(gamma_form));
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string bad = R"({
    "schema_version": 1,
    "design": {"t_levels": 1, "w_levels": 1, "depth": 3},
    "model": {"alpha": 1.0, "tau": [1, 1, 1], "sigma2": 1.0},
    "covariates": [0.25, 0.25, 0.25, 0.25],
    "criterion": "C1",
    "weight": {"kind": "constant", "omega": 0.5}
  })";
  CHECK_THROWS_WITH_AS(parse_config_text(bad),
                       "config error at /design: unknown key 'depth'", ConfigError);

  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "extra": {}})"), ConfigError);
}

TEST_CASE("schema version is mandatory and pinned") {
  CHECK_THROWS_AS(parse_config_text(R"({"design": {"t_levels": 1, "w_levels": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 2})"), ConfigError);
}

TEST_CASE("parse errors carry the line number") {
  // the unterminated string on line 3 is detected at the line-4 newline
  const std::string truncated = "{\n  \"schema_version\": 1,\n  \"oops\n}";
  try {
    parse_config_text(truncated);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("parse error at line 4") != std::string::npos);
  }
}

TEST_CASE("semantic validation failures point at their section") {
  const std::string bad_covariates = R"({
    "schema_version": 1,
    "design": {"t_levels": 1, "w_levels": 1},
    "model": {"alpha": 1.0, "tau": [1, 1, 1], "sigma2": 1.0},
    "covariates": [0.5, 0.25, 0.25, 0.25],
    "criterion": "C1",
    "weight": {"kind": "constant", "omega": 0.5}
  })";
  try {
    parse_config_text(bad_covariates);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/covariates") != std::string::npos);
  }

  const std::string bad_floor = R"({
    "schema_version": 1,
    "design": {"t_levels": 1, "w_levels": 1},
    "model": {"alpha": 1.0, "tau": [1, 1, 1], "sigma2": 1.0},
    "covariates": [0.25, 0.25, 0.25, 0.25],
    "criterion": "C1",
    "weight": {"kind": "constant", "omega": 0.5},
    "constrained": {"efficiency_floor": 1.0}
  })";
  CHECK_THROWS_AS(parse_config_text(bad_floor), ConfigError);
}

TEST_CASE("number formatting is stable") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(2.56e-6) == "2.56e-06");
  CHECK(format_number(0.123456789) == "0.123457");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv escaping") {
  CsvTable table({"a", "b"});
  table.add_row({"plain", "with,comma"});
  table.add_row({"with\"quote", "x"});
  CHECK(table.str() == "a,b\nplain,\"with,comma\"\n\"with\"\"quote\",x\n");
  CHECK_THROWS_AS(table.add_row({"too", "many", "fields"}), std::invalid_argument);
}
