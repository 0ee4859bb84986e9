#include <doctest.h>

#include <Eigen/Dense>

#include <random>

#include "rdbcd/design_space.hpp"

using namespace rdbcd;

TEST_CASE("regressor dummy coding") {
  DesignSpace space(1, 1);
  CHECK(space.regressor_dim() == 3);
  CHECK(space.strata_count() == 4);

  CHECK(space.regressor({0, 0}).isZero(0.0));
  CHECK(space.regressor({1, 1}).isApprox(Eigen::Vector3d(1, 1, 1)));

  DesignSpace wide(2, 1);
  Eigen::VectorXd f = wide.regressor({2, 1});
  Eigen::VectorXd expected(5);
  expected << 0, 1, 1, 0, 1;  // T block (0,1), W block (1), interaction (0,1)
  CHECK(f.isApprox(expected));

  CHECK_THROWS_AS(space.regressor({2, 0}), std::out_of_range);
  CHECK_THROWS_AS(space.regressor({0, -1}), std::out_of_range);
}

TEST_CASE("reference cell maps to zero for every grid") {
  for (int j = 1; j <= 4; ++j) {
    for (int l = 1; l <= 4; ++l) {
      DesignSpace space(j, l);
      CHECK(space.regressor({0, 0}).isZero(0.0));
    }
  }
}

TEST_CASE("stratum enumeration: T level varies fastest") {
  DesignSpace space(1, 1);
  CHECK(space.stratum_index({0, 0}) == 0);
  CHECK(space.stratum_index({1, 0}) == 1);
  CHECK(space.stratum_index({0, 1}) == 2);
  CHECK(space.stratum_index({1, 1}) == 3);
  for (int s = 0; s < space.strata_count(); ++s) {
    CHECK(space.stratum_index(space.profile_of(s)) == s);
  }

  DesignSpace wide(2, 3);
  for (int s = 0; s < wide.strata_count(); ++s) {
    CHECK(wide.stratum_index(wide.profile_of(s)) == s);
  }
  CHECK(wide.stratum_index({1, 0}) == 1);
  CHECK(wide.stratum_index({0, 1}) == 3);
}

TEST_CASE("theta surface matches the reference table headers") {
  DesignSpace space(1, 1);
  Eigen::Vector3d tau(1, 1, 1);
  Eigen::VectorXd theta = theta_surface(space, 1.0, tau);
  Eigen::VectorXd expected(4);
  expected << 1, 2, 2, 4;
  CHECK(theta.isApprox(expected));

  Eigen::Vector3d tau2(-1, 3, 3);
  Eigen::VectorXd theta2 = theta_surface(space, -4.0, tau2);
  expected << -4, -5, -1, 1;
  CHECK(theta2.isApprox(expected));
}

TEST_CASE("constant theta when tau vanishes") {
  DesignSpace space(2, 2);
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(space.regressor_dim());
  Eigen::VectorXd theta = theta_surface(space, 3.25, tau);
  for (int s = 0; s < space.strata_count(); ++s) CHECK(theta(s) == doctest::Approx(3.25));
}

TEST_CASE("theta equals alpha + f.tau recomputed from hand-built dummies") {
  // independent dummy construction: explicit index arithmetic per block
  for (int jl = 1; jl <= 3; ++jl) {
    for (int ll = 1; ll <= 3; ++ll) {
      DesignSpace space(jl, ll);
      const int p = space.regressor_dim();
      std::mt19937_64 gen(17 + jl * 10 + ll);
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      Eigen::VectorXd tau(p);
      for (int i = 0; i < p; ++i) tau(i) = u(gen);
      const double alpha = u(gen);
      const Eigen::VectorXd theta = theta_surface(space, alpha, tau);
      for (int l = 0; l <= ll; ++l) {
        for (int j = 0; j <= jl; ++j) {
          double dot = 0.0;
          if (j >= 1) dot += tau(j - 1);
          if (l >= 1) dot += tau(jl + l - 1);
          if (j >= 1 && l >= 1) dot += tau(jl + ll + (j - 1) * ll + (l - 1));
          const int s = space.stratum_index({j, l});
          CHECK(theta(s) == doctest::Approx(alpha + dot).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("regressor coordinates over all strata have full rank") {
  for (int jl = 1; jl <= 3; ++jl) {
    for (int ll = 1; ll <= 3; ++ll) {
      DesignSpace space(jl, ll);
      Eigen::MatrixXd f(space.strata_count(), space.regressor_dim());
      for (int s = 0; s < space.strata_count(); ++s) {
        f.row(s) = space.regressor(space.profile_of(s)).transpose();
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(f);
      CHECK(lu.rank() == space.regressor_dim());
    }
  }
}

TEST_CASE("type validation") {
  DesignSpace space(1, 1);
  CHECK_THROWS_AS(DesignSpace(0, 1), std::invalid_argument);

  ModelParams params;
  params.beta_a = Eigen::VectorXd::Zero(3);
  params.beta_b = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(params.validate(space), std::invalid_argument);
  params.beta_b = Eigen::VectorXd::Zero(3);
  params.sigma2 = 0.0;
  CHECK_THROWS_AS(params.validate(space), std::invalid_argument);
  params.sigma2 = 1.0;
  CHECK_NOTHROW(params.validate(space));

  CovariateDistribution dist{Eigen::Vector4d(0.5, 0.5, 0.0, 0.0)};
  CHECK_THROWS_AS(dist.validate(space), std::invalid_argument);
  dist.p = Eigen::Vector4d(0.3, 0.3, 0.3, 0.3);
  CHECK_THROWS_AS(dist.validate(space), std::invalid_argument);
  dist.p = Eigen::Vector4d(0.25, 0.25, 0.25, 0.25);
  CHECK_NOTHROW(dist.validate(space));
}
