#include "rdbcd/criteria.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdbcd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(CriterionId id) {
  switch (id) {
    case CriterionId::C1: return "C1";
    case CriterionId::C2: return "C2";
    case CriterionId::C3: return "C3";
    case CriterionId::C4: return "C4";
    case CriterionId::C5: return "C5";
  }
  return "?";
}

CriterionId parse_criterion(const std::string& name) {
  if (name == "C1") return CriterionId::C1;
  if (name == "C2") return CriterionId::C2;
  if (name == "C3") return CriterionId::C3;
  if (name == "C4") return CriterionId::C4;
  if (name == "C5") return CriterionId::C5;
  throw std::invalid_argument("unknown criterion '" + name + "' (expected C1..C5)");
}

Eigen::VectorXd StratumCounts::proportions() const {
  Eigen::VectorXd pi(subjects.size());
  for (Eigen::Index s = 0; s < subjects.size(); ++s) {
    pi(s) = subjects(s) > 0 ? static_cast<double>(on_a(s)) / subjects(s)
                            : std::numeric_limits<double>::quiet_NaN();
  }
  return pi;
}

void StratumCounts::validate(const DesignSpace& space) const {
  if (subjects.size() != space.strata_count() || on_a.size() != space.strata_count()) {
    throw std::invalid_argument("StratumCounts: size mismatch with design space");
  }
  for (Eigen::Index s = 0; s < subjects.size(); ++s) {
    if (subjects(s) < 0 || on_a(s) < 0 || on_a(s) > subjects(s)) {
      throw std::invalid_argument("StratumCounts: invalid counts at stratum " +
                                  std::to_string(s));
    }
  }
}

Eigen::MatrixXd information_matrix(const DesignSpace& space, const StratumCounts& counts) {
  counts.validate(space);
  const long long n = counts.total();
  if (n == 0) throw std::domain_error("information_matrix: no subjects");

  const int p = space.regressor_dim();
  const int d = space.model_dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xa = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd xb = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < space.strata_count(); ++s) {
    const Eigen::VectorXd f = space.regressor(space.profile_of(s));
    xa.setZero();
    xa(0) = 1.0;
    xa.segment(2, p) = f;
    xb.setZero();
    xb(1) = 1.0;
    xb.segment(2 + p, p) = f;
    m.noalias() += static_cast<double>(counts.on_a(s)) * xa * xa.transpose();
    m.noalias() += static_cast<double>(counts.subjects(s) - counts.on_a(s)) * xb * xb.transpose();
  }
  return m / static_cast<double>(n);
}

Eigen::VectorXd trace_criterion_weights(CriterionId id, const DesignSpace& space) {
  const int j_levels = space.t_levels();
  const int l_levels = space.w_levels();
  Eigen::VectorXd w(space.strata_count());
  for (int s = 0; s < space.strata_count(); ++s) {
    const Profile z = space.profile_of(s);
    if (z.t == 0 && z.w == 0) {
      w(s) = static_cast<double>((j_levels + 1) * (l_levels + 1));
      if (id == CriterionId::C4 || id == CriterionId::C5) w(s) -= 1.0;
    } else if (z.w == 0) {
      w(s) = l_levels + 1;
    } else if (z.t == 0) {
      w(s) = j_levels + 1;
    } else {
      w(s) = 1.0;
    }
  }
  return w;
}

double criterion_closed_form(CriterionId id, const DesignSpace& space,
                             const StratumCounts& counts, double sigma2) {
  counts.validate(space);
  const int k = space.strata_count();
  const double n = static_cast<double>(counts.total());
  Eigen::VectorXd pi(k);
  for (int s = 0; s < k; ++s) {
    if (counts.subjects(s) == 0) return kInf;
    pi(s) = static_cast<double>(counts.on_a(s)) / counts.subjects(s);
    if (pi(s) <= 0.0 || pi(s) >= 1.0) return kInf;
  }

  switch (id) {
    case CriterionId::C1: {
      double denom = 1.0;
      for (int s = 0; s < k; ++s) {
        const double ns = counts.subjects(s);
        denom *= pi(s) * (1.0 - pi(s)) * ns * ns;
      }
      return std::pow(sigma2, space.model_dim()) / denom;
    }
    case CriterionId::C2: {
      double denom = 1.0;
      for (int s = 0; s < k; ++s) {
        const double ns = counts.subjects(s);
        denom *= pi(s) * (1.0 - pi(s)) * ns * ns;
      }
      const double na = counts.on_a.cast<double>().sum();
      return na * (n - na) * std::pow(sigma2, 2 * space.regressor_dim()) / denom;
    }
    case CriterionId::C3:
    case CriterionId::C4:
    case CriterionId::C5: {
      const Eigen::VectorXd w = trace_criterion_weights(id, space);
      double sum = 0.0;
      for (int s = 0; s < k; ++s) {
        sum += w(s) / (counts.subjects(s) * pi(s) * (1.0 - pi(s)));
      }
      return sigma2 * sum;
    }
  }
  return kInf;
}

double criterion_from_information(CriterionId id, const DesignSpace& space,
                                  const StratumCounts& counts, double sigma2) {
  const Eigen::MatrixXd m = information_matrix(space, counts);
  const double n = static_cast<double>(counts.total());
  const int p = space.regressor_dim();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return kInf;
  const Eigen::MatrixXd v = (sigma2 / n) * lu.inverse();

  switch (id) {
    case CriterionId::C1:
      return v.determinant();
    case CriterionId::C2:
      return v.bottomRightCorner(2 * p, 2 * p).determinant();
    case CriterionId::C3:
      return v.trace();
    case CriterionId::C4:
      return v.bottomRightCorner(2 * p, 2 * p).trace();
    case CriterionId::C5: {
      // contraction with the (beta_A - beta_B) selector
      double tr = 0.0;
      for (int i = 0; i < p; ++i) {
        tr += v(2 + i, 2 + i) + v(2 + p + i, 2 + p + i) - v(2 + i, 2 + p + i) -
              v(2 + p + i, 2 + i);
      }
      return tr;
    }
  }
  return kInf;
}

double expected_inferential(CriterionId id, const DesignSpace& space,
                            const AllocationVector& pi, const CovariateDistribution& dist,
                            long long n, double sigma2) {
  dist.validate(space);
  const int k = space.strata_count();
  if (pi.size() != k) throw std::invalid_argument("expected_inferential: pi size mismatch");
  if (n <= 0) throw std::invalid_argument("expected_inferential: n must be positive");
  for (int s = 0; s < k; ++s) {
    if (pi(s) <= 0.0 || pi(s) >= 1.0) return kInf;
  }
  const double nn = static_cast<double>(n);

  switch (id) {
    case CriterionId::C1:
    case CriterionId::C2: {
      double denom = 1.0;
      for (int s = 0; s < k; ++s) {
        const double ns = nn * dist.p(s);
        denom *= pi(s) * (1.0 - pi(s)) * ns * ns;
      }
      if (id == CriterionId::C1) return std::pow(sigma2, space.model_dim()) / denom;
      const double frac_a = dist.p.dot(pi);
      return (nn * frac_a) * (nn * (1.0 - frac_a)) *
             std::pow(sigma2, 2 * space.regressor_dim()) / denom;
    }
    case CriterionId::C3:
    case CriterionId::C4:
    case CriterionId::C5: {
      const Eigen::VectorXd w = trace_criterion_weights(id, space);
      double sum = 0.0;
      for (int s = 0; s < k; ++s) {
        sum += w(s) / (nn * dist.p(s) * pi(s) * (1.0 - pi(s)));
      }
      return sigma2 * sum;
    }
  }
  return kInf;
}

double ethical_expected(const DesignSpace& space, const AllocationVector& pi,
                        const Eigen::VectorXd& theta, const CovariateDistribution& dist) {
  dist.validate(space);
  const int k = space.strata_count();
  if (pi.size() != k || theta.size() != k) {
    throw std::invalid_argument("ethical_expected: size mismatch");
  }
  double sum = 0.0;
  for (int s = 0; s < k; ++s) {
    const double sgn = theta(s) > 0.0 ? 1.0 : (theta(s) < 0.0 ? -1.0 : 0.0);
    sum += dist.p(s) * std::abs(theta(s)) * (0.5 - (0.5 - pi(s)) * sgn);
  }
  return sum;
}

double inferential_efficiency(CriterionId id, const DesignSpace& space,
                              const AllocationVector& pi, const CovariateDistribution& dist) {
  dist.validate(space);
  const int k = space.strata_count();
  if (pi.size() != k) throw std::invalid_argument("inferential_efficiency: pi size mismatch");

  if (id == CriterionId::C1 || id == CriterionId::C2) {
    double prod = 1.0;
    for (int s = 0; s < k; ++s) prod *= 4.0 * pi(s) * (1.0 - pi(s));
    return prod;
  }
  const Eigen::VectorXd w = trace_criterion_weights(id, space);
  double at_half = 0.0;
  double at_pi = 0.0;
  for (int s = 0; s < k; ++s) {
    at_half += 4.0 * w(s) / dist.p(s);
    const double q = pi(s) * (1.0 - pi(s));
    if (q <= 0.0) return 0.0;
    at_pi += w(s) / (dist.p(s) * q);
  }
  return at_half / at_pi;
}

EfficiencyPair efficiencies(CriterionId id, const DesignSpace& space,
                            const AllocationVector& pi, const Eigen::VectorXd& theta,
                            const CovariateDistribution& dist) {
  EfficiencyPair out;
  out.psi_i = inferential_efficiency(id, space, pi, dist);
  double e_abs = 0.0;
  for (int s = 0; s < space.strata_count(); ++s) e_abs += dist.p(s) * std::abs(theta(s));
  if (e_abs > 0.0) {
    out.psi_e = ethical_expected(space, pi, theta, dist) / e_abs;
  }
  return out;
}

}  // namespace rdbcd
