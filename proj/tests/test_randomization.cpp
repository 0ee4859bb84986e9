#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rdbcd/randomization.hpp"

using namespace rdbcd;

namespace {

std::vector<RandomizationRule> built_in_rules() {
  std::vector<RandomizationRule> rules;
  rules.push_back(RandomizationRule::zhang_cara());
  rules.push_back(RandomizationRule::baz1(1.0));
  rules.push_back(RandomizationRule::baz1(2.5));
  rules.push_back(RandomizationRule::baz2(2.0 / 3.0, 4));
  rules.push_back(RandomizationRule::baz2(0.3, 9));
  rules.push_back(RandomizationRule::erade(2.0 / 3.0));
  rules.push_back(RandomizationRule::atkinson_da());
  return rules;
}

const double kGrid[] = {0.05, 0.15, 0.3, 0.45, 0.5, 0.55, 0.7, 0.85, 0.95};
const double kZGrid[] = {0.05, 0.2, 0.5, 0.8, 0.95};

}  // namespace

TEST_CASE("rule evaluation rejects the closed boundary") {
  for (const auto& rule : built_in_rules()) {
    CHECK_THROWS_AS(rule.allocation_probability(0.0, 0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(rule.allocation_probability(0.5, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(rule.allocation_probability(0.5, 0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(rule.allocation_probability(-0.1, 0.5, 0.5), std::domain_error);
  }
}

TEST_CASE("values stay in [0,1]") {
  for (const auto& rule : built_in_rules()) {
    for (double x : kGrid) {
      for (double y : kGrid) {
        for (double z : kZGrid) {
          const double phi = rule.allocation_probability(x, y, z);
          CHECK(phi >= 0.0);
          CHECK(phi <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("axiom: monotone in x and y") {
  for (const auto& rule : built_in_rules()) {
    for (double z : kZGrid) {
      for (double y : kGrid) {
        double prev = 2.0;
        for (double x : kGrid) {
          const double phi = rule.allocation_probability(x, y, z);
          CHECK(phi <= prev + 1e-12);
          prev = phi;
        }
      }
      if (rule.kind() == RandomizationRule::Kind::atkinson_da) continue;  // ignores y
      for (double x : kGrid) {
        double prev = -1.0;
        for (double y : kGrid) {
          const double phi = rule.allocation_probability(x, y, z);
          CHECK(phi >= prev - 1e-12);
          prev = phi;
        }
      }
    }
  }
}

TEST_CASE("axiom: exact fixed point at x = y") {
  for (const auto& rule : built_in_rules()) {
    if (rule.kind() == RandomizationRule::Kind::atkinson_da) continue;  // targets 1/2 only
    for (double x : kGrid) {
      for (double z : kZGrid) {
        CHECK(rule.allocation_probability(x, x, z) == x);
      }
    }
  }
  const auto atkinson = RandomizationRule::atkinson_da();
  for (double z : kZGrid) CHECK(atkinson.allocation_probability(0.5, 0.5, z) == 0.5);
}

TEST_CASE("axiom: reinforcement direction in z") {
  for (const auto& rule : built_in_rules()) {
    for (double x : kGrid) {
      for (double y : kGrid) {
        double prev_under = 2.0;   // x < y: phi nonincreasing in z
        double prev_over = -1.0;   // x > y: phi nondecreasing in z
        for (double z : kZGrid) {
          const double phi = rule.allocation_probability(x, y, z);
          if (x < y) {
            CHECK(phi <= prev_under + 1e-12);
            prev_under = phi;
          } else if (x > y) {
            CHECK(phi >= prev_over - 1e-12);
            prev_over = phi;
          }
        }
      }
    }
  }
}

TEST_CASE("axiom: label symmetry") {
  for (const auto& rule : built_in_rules()) {
    for (double x : kGrid) {
      for (double y : kGrid) {
        for (double z : kZGrid) {
          const double direct = rule.allocation_probability(x, y, z);
          const double mirrored = rule.allocation_probability(1.0 - x, 1.0 - y, z);
          CHECK(std::abs(direct - (1.0 - mirrored)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("forcing direction relative to the target") {
  for (const auto& rule : built_in_rules()) {
    const auto kind = rule.kind();
    if (kind == RandomizationRule::Kind::atkinson_da) continue;
    const bool strict = kind != RandomizationRule::Kind::zhang_cara;
    for (double x : kGrid) {
      for (double y : kGrid) {
        for (double z : kZGrid) {
          const double phi = rule.allocation_probability(x, y, z);
          if (x >= y) CHECK(phi <= y + 1e-12);
          if (x < y) {
            if (strict) {
              CHECK(phi > y);
            } else {
              CHECK(phi >= y);  // the target-following rule attains equality
            }
          }
        }
      }
    }
  }
}

TEST_CASE("spot values match hand arithmetic") {
  const auto erade = RandomizationRule::erade(2.0 / 3.0);
  CHECK(erade.allocation_probability(0.8, 0.6, 0.3) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(erade.allocation_probability(0.2, 0.6, 0.3) ==
        doctest::Approx(1.0 - (2.0 / 3.0) * 0.4).epsilon(1e-14));

  // power rule, k = 1, z = 0.5 -> exponent 2
  const auto baz1 = RandomizationRule::baz1(1.0);
  const double num = 0.75 * 1.25 * 1.25;
  const double den = num + 0.25 * 0.75 * 0.75;
  CHECK(baz1.allocation_probability(0.5, 0.75, 0.5) == doctest::Approx(num / den).epsilon(1e-12));
  CHECK(baz1.allocation_probability(0.5, 0.75, 0.5) == doctest::Approx(0.892857).epsilon(1e-6));

  // step rule, eps = 2/3, 4 strata, z = 0.25 -> exponent 1
  const auto baz2 = RandomizationRule::baz2(2.0 / 3.0, 4);
  const double a = 0.75 * (5.0 / 3.0);
  const double b = 0.25 * (1.0 / 3.0);
  CHECK(baz2.allocation_probability(0.5, 0.75, 0.25) == doctest::Approx(a / (a + b)).epsilon(1e-12));

  const auto zhang = RandomizationRule::zhang_cara();
  CHECK(zhang.allocation_probability(0.9, 0.42, 0.1) == 0.42);

  const auto atkinson = RandomizationRule::atkinson_da();
  CHECK(atkinson.allocation_probability(0.5, 0.7, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  const double x = 0.8;
  CHECK(atkinson.allocation_probability(x, 0.7, 0.5) ==
        doctest::Approx(0.04 / (0.04 + 0.64)).epsilon(1e-12));
}

TEST_CASE("step rule with zero epsilon follows the target") {
  const auto rule = RandomizationRule::baz2(0.0, 4);
  for (double x : kGrid) {
    for (double y : kGrid) {
      CHECK(rule.allocation_probability(x, y, 0.3) == doctest::Approx(y).epsilon(1e-14));
    }
  }
}

TEST_CASE("power rule forcing strengthens as z shrinks") {
  const auto rule = RandomizationRule::baz1(1.0);
  // under-allocated stratum: phi increases toward 1 as the stratum gets rarer
  double prev = 0.0;
  for (double z : {0.8, 0.4, 0.2, 0.1, 0.05, 0.02, 0.01}) {
    const double phi = rule.allocation_probability(0.3, 0.6, z);
    CHECK(phi >= prev);
    prev = phi;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("built-ins match a direct generic-family construction") {
  // the power rule assembled from its descriptor pieces
  FamilyDescriptor power{
      [](double t) { return t * t * t; },              // F(t) = t^3
      [](double t) { return std::cbrt(t); },
      [](double x, double y) { return 1.0 - (x - y); },
      [](double z) { return 1.0 / z; },
  };
  const auto via_family = RandomizationRule::custom_family(power, "power3");
  const auto direct = RandomizationRule::baz1(3.0);
  for (double x : kGrid) {
    for (double y : kGrid) {
      for (double z : kZGrid) {
        CHECK(via_family.allocation_probability(x, y, z) ==
              doctest::Approx(direct.allocation_probability(x, y, z)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(RandomizationRule::baz1(0.0), std::invalid_argument);
  CHECK_THROWS_AS(RandomizationRule::baz2(1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(RandomizationRule::baz2(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(RandomizationRule::erade(1.0), std::invalid_argument);
}
