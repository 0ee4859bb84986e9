#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "rdbcd/criteria.hpp"
#include "rdbcd/targets.hpp"
#include "support/test_support.hpp"

using namespace rdbcd;

namespace {
const CriterionId kAllCriteria[] = {CriterionId::C1, CriterionId::C2, CriterionId::C3,
                                    CriterionId::C4, CriterionId::C5};
}

TEST_CASE("information matrix equals the per-row assembly") {
  std::mt19937_64 gen(7);
  for (int jl = 1; jl <= 2; ++jl) {
    for (int ll = 1; ll <= 2; ++ll) {
      DesignSpace space(jl, ll);
      for (int rep = 0; rep < 5; ++rep) {
        const StratumCounts counts = test::random_counts(gen, space);
        const Eigen::MatrixXd m = information_matrix(space, counts);
        const Eigen::MatrixXd oracle = test::xtx_by_rows(space, counts);
        CHECK((m - oracle).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("balanced information matrix has the balanced block form") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(4, 4, 4, 4);
  counts.on_a = Eigen::Vector4i(2, 2, 2, 2);
  const Eigen::MatrixXd m = information_matrix(space, counts);
  const int n = 16;
  const int p = 3;

  // (1/2n) [ n, 0, 1'F, 0; 0, n, 0, 1'F; F'1, 0, F'F, 0; 0, F'1, 0, F'F ]
  Eigen::MatrixXd f(4, p);
  for (int s = 0; s < 4; ++s) f.row(s) = space.regressor(space.profile_of(s)).transpose();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(8, 8);
  big(0, 0) = big(1, 1) = n;
  Eigen::RowVectorXd colsum = 4.0 * f.colwise().sum();  // 4 subjects per stratum
  big.block(0, 2, 1, p) = colsum;
  big.block(2, 0, p, 1) = colsum.transpose();
  big.block(1, 2 + p, 1, p) = colsum;
  big.block(2 + p, 1, p, 1) = colsum.transpose();
  Eigen::MatrixXd ftf = 4.0 * f.transpose() * f;
  big.block(2, 2, p, p) = ftf;
  big.block(2 + p, 2 + p, p, p) = ftf;
  CHECK((m - big / (2.0 * n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("missing strata make the information matrix singular") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(2, 0, 0, 0);
  counts.on_a = Eigen::Vector4i(1, 0, 0, 0);
  const Eigen::MatrixXd m = information_matrix(space, counts);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  CHECK(lu.rank() < space.model_dim());

  counts.subjects.setZero();
  counts.on_a.setZero();
  CHECK_THROWS_AS(information_matrix(space, counts), std::domain_error);
}

TEST_CASE("balanced closed form C1 value") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(10, 10, 10, 10);
  counts.on_a = Eigen::Vector4i(5, 5, 5, 5);
  const double c1 = criterion_closed_form(CriterionId::C1, space, counts, 1.0);
  CHECK(c1 == doctest::Approx(1.0 / std::pow(0.25 * 100.0, 4)).epsilon(1e-12));
  CHECK(c1 == doctest::Approx(2.56e-6).epsilon(1e-9));
}

TEST_CASE("uneven counts: determinant from the matrix route matches the closed form") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(10, 10, 10, 10);
  counts.on_a = Eigen::Vector4i(3, 5, 7, 9);
  const double cf = criterion_closed_form(CriterionId::C1, space, counts, 1.0);
  const double mx = criterion_from_information(CriterionId::C1, space, counts, 1.0);
  CHECK(test::rel_error(cf, mx) < 1e-9);
}

TEST_CASE("closed forms match dense inversion on random configurations") {
  std::mt19937_64 gen(12345);
  int checked = 0;
  while (checked < 120) {
    std::uniform_int_distribution<int> dims(1, 2);
    DesignSpace space(dims(gen), dims(gen));
    const StratumCounts counts = test::random_counts(gen, space);
    std::uniform_real_distribution<double> su(0.5, 2.0);
    const double sigma2 = su(gen);
    for (CriterionId id : kAllCriteria) {
      const double cf = criterion_closed_form(id, space, counts, sigma2);
      const double mx = criterion_from_information(id, space, counts, sigma2);
      CHECK(test::rel_error(cf, mx) < 1e-9);
    }
    ++checked;
  }
}

TEST_CASE("C4 and C5 coincide") {
  std::mt19937_64 gen(99);
  DesignSpace space(1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const StratumCounts counts = test::random_counts(gen, space);
    const double c4 = criterion_closed_form(CriterionId::C4, space, counts, 1.3);
    const double c5 = criterion_closed_form(CriterionId::C5, space, counts, 1.3);
    CHECK(c4 == c5);  // same simplification, bitwise
    // and the two matrix contractions agree
    const double m4 = criterion_from_information(CriterionId::C4, space, counts, 1.3);
    const double m5 = criterion_from_information(CriterionId::C5, space, counts, 1.3);
    CHECK(test::rel_error(m4, m5) < 1e-9);
  }
}

TEST_CASE("C3 minus C4 is the reference-cell variance term") {
  std::mt19937_64 gen(2024);
  DesignSpace space(1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const StratumCounts counts = test::random_counts(gen, space);
    const double sigma2 = 0.7;
    const double c3 = criterion_closed_form(CriterionId::C3, space, counts, sigma2);
    const double c4 = criterion_closed_form(CriterionId::C4, space, counts, sigma2);
    const double pi0 = static_cast<double>(counts.on_a(0)) / counts.subjects(0);
    const double expected = sigma2 / (counts.subjects(0) * pi0 * (1.0 - pi0));
    CHECK(c3 - c4 == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("boundary allocations give the infinite-loss value") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(10, 10, 10, 10);
  counts.on_a = Eigen::Vector4i(10, 5, 5, 5);  // stratum 0 fully on A
  for (CriterionId id : kAllCriteria) {
    CHECK(std::isinf(criterion_closed_form(id, space, counts, 1.0)));
  }
  counts.on_a(0) = 5;
  counts.subjects(2) = 0;
  counts.on_a(2) = 0;
  for (CriterionId id : kAllCriteria) {
    CHECK(std::isinf(criterion_closed_form(id, space, counts, 1.0)));
  }

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(4, 0.5);
  pi(1) = 1.0;
  const CovariateDistribution uniform = CovariateDistribution::uniform(space);
  for (CriterionId id : kAllCriteria) {
    CHECK(std::isinf(expected_inferential(id, space, pi, uniform, 100, 1.0)));
  }
}

TEST_CASE("expected trace criterion at the balanced allocation") {
  DesignSpace space(1, 1);
  const CovariateDistribution uniform = CovariateDistribution::uniform(space);
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(4, 0.5);
  // stratum weights 4,2,2,1 over equal cells of 25 subjects at pi = 1/2
  const double value = expected_inferential(CriterionId::C3, space, pi, uniform, 100, 1.0);
  CHECK(value == doctest::Approx((1.0 + 2.0 + 2.0 + 4.0) / (100.0 * 0.25 * 0.25)).epsilon(1e-12));
}

TEST_CASE("expected criteria are minimized at the balanced allocation") {
  std::mt19937_64 gen(5150);
  DesignSpace space(1, 1);
  const Eigen::VectorXd balanced = Eigen::VectorXd::Constant(4, 0.5);
  for (int rep = 0; rep < 100; ++rep) {
    const CovariateDistribution dist = test::random_distribution(gen, 4);
    const Eigen::VectorXd pi = test::random_interior_pi(gen, 4);
    for (CriterionId id : kAllCriteria) {
      const double at_pi = expected_inferential(id, space, pi, dist, 200, 1.0);
      const double at_half = expected_inferential(id, space, balanced, dist, 200, 1.0);
      CHECK(at_half <= at_pi + 1e-15);
    }
  }
}

TEST_CASE("expected C1 ratio is the product form") {
  std::mt19937_64 gen(31);
  DesignSpace space(1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const CovariateDistribution dist = test::random_distribution(gen, 4);
    const Eigen::VectorXd pi = test::random_interior_pi(gen, 4);
    const Eigen::VectorXd balanced = Eigen::VectorXd::Constant(4, 0.5);
    const double ratio = expected_inferential(CriterionId::C1, space, pi, dist, 160, 1.0) /
                         expected_inferential(CriterionId::C1, space, balanced, dist, 160, 1.0);
    double prod = 1.0;
    for (int s = 0; s < 4; ++s) prod *= 0.25 / (pi(s) * (1.0 - pi(s)));
    CHECK(ratio == doctest::Approx(prod).epsilon(1e-10));
    CHECK(1.0 / inferential_efficiency(CriterionId::C1, space, pi, dist) ==
          doctest::Approx(prod).epsilon(1e-10));
  }
}

TEST_CASE("determinant criteria are invariant under strata relabeling, trace criteria are not") {
  DesignSpace space(1, 1);
  StratumCounts counts;
  counts.subjects = Eigen::Vector4i(8, 12, 20, 28);
  counts.on_a = Eigen::Vector4i(3, 5, 11, 13);
  StratumCounts swapped;
  swapped.subjects = Eigen::Vector4i(28, 12, 20, 8);  // swap strata 0 and 3
  swapped.on_a = Eigen::Vector4i(13, 5, 11, 3);
  for (CriterionId id : {CriterionId::C1, CriterionId::C2}) {
    CHECK(criterion_closed_form(id, space, counts, 1.0) ==
          doctest::Approx(criterion_closed_form(id, space, swapped, 1.0)).epsilon(1e-12));
  }
  const double c3 = criterion_closed_form(CriterionId::C3, space, counts, 1.0);
  const double c3s = criterion_closed_form(CriterionId::C3, space, swapped, 1.0);
  CHECK(std::abs(c3 - c3s) > 1e-6);
}

TEST_CASE("expected criteria are strictly convex along segments") {
  std::mt19937_64 gen(808);
  DesignSpace space(1, 1);
  for (int rep = 0; rep < 50; ++rep) {
    const CovariateDistribution dist = test::random_distribution(gen, 4);
    const Eigen::VectorXd pi1 = test::random_interior_pi(gen, 4);
    const Eigen::VectorXd pi2 = test::random_interior_pi(gen, 4);
    if ((pi1 - pi2).cwiseAbs().maxCoeff() < 1e-3) continue;
    const Eigen::VectorXd mid = 0.5 * (pi1 + pi2);
    for (CriterionId id : kAllCriteria) {
      const double at_mid = expected_inferential(id, space, mid, dist, 100, 1.0);
      const double avg = 0.5 * (expected_inferential(id, space, pi1, dist, 100, 1.0) +
                                expected_inferential(id, space, pi2, dist, 100, 1.0));
      CHECK(at_mid < avg);
    }
  }
}

TEST_CASE("ethical criterion values") {
  DesignSpace space(1, 1);
  const CovariateDistribution uniform = CovariateDistribution::uniform(space);
  Eigen::VectorXd theta(4);
  theta << 1, 2, 2, 4;

  const AllocationVector ideal = ethical_target(theta);
  CHECK(ethical_expected(space, ideal, theta, uniform) == doctest::Approx(2.25).epsilon(1e-14));

  const Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(ethical_expected(space, half, theta, uniform) == doctest::Approx(1.125).epsilon(1e-14));

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(ethical_expected(space, half, zero, uniform) == 0.0);
}

TEST_CASE("ethical criterion is affine with slope sign sgn(theta)") {
  std::mt19937_64 gen(4242);
  DesignSpace space(1, 1);
  for (int rep = 0; rep < 30; ++rep) {
    const CovariateDistribution dist = test::random_distribution(gen, 4);
    const Eigen::VectorXd theta = test::random_theta(gen, 4);
    Eigen::VectorXd pi = test::random_interior_pi(gen, 4);
    for (int s = 0; s < 4; ++s) {
      const double base = ethical_expected(space, pi, theta, dist);
      Eigen::VectorXd lifted = pi;
      lifted(s) += 0.01;
      const double up = ethical_expected(space, lifted, theta, dist);
      lifted(s) = pi(s) + 0.02;
      const double up2 = ethical_expected(space, lifted, theta, dist);
      // affine: equal increments, slope p * theta
      CHECK(up - base == doctest::Approx(up2 - up).epsilon(1e-9));
      CHECK(up - base == doctest::Approx(0.01 * dist.p(s) * theta(s)).epsilon(1e-9));
    }
  }
}

TEST_CASE("efficiencies at the reference allocations") {
  DesignSpace space(1, 1);
  const CovariateDistribution uniform = CovariateDistribution::uniform(space);
  Eigen::VectorXd theta(4);
  theta << 1, 2, 2, 4;

  const Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
  for (CriterionId id : kAllCriteria) {
    const EfficiencyPair eff = efficiencies(id, space, half, theta, uniform);
    CHECK(eff.psi_i == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(eff.psi_e.has_value());
    CHECK(*eff.psi_e == doctest::Approx(0.5).epsilon(1e-14));
  }

  // degenerate ethics: psi_e not applicable
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  const EfficiencyPair eff = efficiencies(CriterionId::C1, space, half, zero, uniform);
  CHECK_FALSE(eff.psi_e.has_value());

  // psi_i = 1 only at joint balance, psi_e = 1 only at the ethical ideal
  std::mt19937_64 gen(1212);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd pi = test::random_interior_pi(gen, 4);
    if ((pi.array() - 0.5).abs().maxCoeff() < 1e-3) continue;
    for (CriterionId id : kAllCriteria) {
      const EfficiencyPair e = efficiencies(id, space, pi, theta, uniform);
      CHECK(e.psi_i < 1.0);
      CHECK(*e.psi_e < 1.0);
    }
  }
  const EfficiencyPair ideal = efficiencies(CriterionId::C1, space, ethical_target(theta),
                                            theta, uniform);
  CHECK(*ideal.psi_e == 1.0);
}

TEST_CASE("constrained-table efficiency spot values") {
  DesignSpace space(1, 1);
  const CovariateDistribution uniform = CovariateDistribution::uniform(space);
  Eigen::VectorXd theta(4);
  theta << 1, 2, 2, 4;

  Eigen::VectorXd pi(4);
  pi << 0.599, 0.679, 0.679, 0.781;
  EfficiencyPair eff = efficiencies(CriterionId::C1, space, pi, theta, uniform);
  CHECK(*eff.psi_e == doctest::Approx(0.72).epsilon(0.01));
  CHECK(eff.psi_i == doctest::Approx(0.5).epsilon(0.01));

  pi << 0.691, 0.841, 0.841, 0.977;
  eff = efficiencies(CriterionId::C1, space, pi, theta, uniform);
  CHECK(*eff.psi_e == doctest::Approx(0.88).epsilon(0.01));
  CHECK(eff.psi_i == doctest::Approx(0.02).epsilon(0.25));
}
