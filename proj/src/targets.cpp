#include "rdbcd/targets.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>

#include "rdbcd/special_functions.hpp"

namespace rdbcd {

namespace {

constexpr double kGradientTarget = 1e-13;   // stop early when reached
constexpr double kGradientAccept = 1e-10;   // contract bound
constexpr int kMaxIterations = 200;

Eigen::VectorXd sigmoid(const Eigen::VectorXd& u) {
  return u.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

/// Value, gradient and Hessian (in pi) of the compound objective
///   G(pi) = omega * E|theta| / PhiE(pi) + (1 - omega) * R(pi),
/// where PhiE is the expected ethical gain (affine in pi) and R = 1/Psi_I.
class CompoundObjective {
 public:
  CompoundObjective(CriterionId id, const DesignSpace& space, const Eigen::VectorXd& theta,
                    const CovariateDistribution& dist, double omega)
      : id_(id), omega_(omega), k_(space.strata_count()) {
    slope_.resize(k_);
    offset_ = 0.0;
    e_abs_ = 0.0;
    for (int s = 0; s < k_; ++s) {
      slope_(s) = dist.p(s) * theta(s);
      e_abs_ += dist.p(s) * std::abs(theta(s));
      if (theta(s) < 0.0) offset_ += dist.p(s) * (-theta(s));
    }
    if (id_ != CriterionId::C1 && id_ != CriterionId::C2) {
      const Eigen::VectorXd w = trace_criterion_weights(id_, space);
      w_over_p_ = (w.array() / dist.p.array()).matrix();
      s_half_ = 4.0 * w_over_p_.sum();
    }
  }

  double e_abs_theta() const { return e_abs_; }

  double phi_e(const Eigen::VectorXd& pi) const { return offset_ + slope_.dot(pi); }

  double value(const Eigen::VectorXd& pi) const {
    double g = 0.0;
    if (omega_ > 0.0) {
      const double fe = phi_e(pi);
      if (!(fe > 0.0)) return std::numeric_limits<double>::infinity();
      g += omega_ * e_abs_ / fe;
    }
    return g + (1.0 - omega_) * inferential_part(pi);
  }

  /// Gradient and Hessian with respect to pi.
  void derivatives(const Eigen::VectorXd& pi, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    grad.setZero(k_);
    hess.setZero(k_, k_);
    if (omega_ > 0.0) {
      const double fe = phi_e(pi);
      grad.noalias() -= (omega_ * e_abs_ / (fe * fe)) * slope_;
      hess.noalias() += (2.0 * omega_ * e_abs_ / (fe * fe * fe)) * slope_ * slope_.transpose();
    }
    const double c = 1.0 - omega_;
    if (id_ == CriterionId::C1 || id_ == CriterionId::C2) {
      const double r = inferential_part(pi);
      Eigen::VectorXd h1(k_);
      for (int s = 0; s < k_; ++s) {
        const double q = pi(s) * (1.0 - pi(s));
        const double d1 = (2.0 * pi(s) - 1.0) / q;
        h1(s) = d1;
        const double d2 = (2.0 * q + (2.0 * pi(s) - 1.0) * (2.0 * pi(s) - 1.0)) / (q * q);
        hess(s, s) += c * r * d2;
      }
      grad.noalias() += c * r * h1;
      hess.noalias() += c * r * h1 * h1.transpose();
    } else {
      for (int s = 0; s < k_; ++s) {
        const double q = pi(s) * (1.0 - pi(s));
        const double two_pm1 = 2.0 * pi(s) - 1.0;
        grad(s) += c * w_over_p_(s) * two_pm1 / (q * q) / s_half_;
        hess(s, s) += c * w_over_p_(s) * 2.0 * (q + two_pm1 * two_pm1) / (q * q * q) / s_half_;
      }
    }
  }

 private:
  // 1/Psi_I normalized so the balanced allocation gives 1.
  double inferential_part(const Eigen::VectorXd& pi) const {
    if (id_ == CriterionId::C1 || id_ == CriterionId::C2) {
      double r = 1.0;
      for (int s = 0; s < k_; ++s) r /= 4.0 * pi(s) * (1.0 - pi(s));
      return r;
    }
    double sum = 0.0;
    for (int s = 0; s < k_; ++s) sum += w_over_p_(s) / (pi(s) * (1.0 - pi(s)));
    return sum / s_half_;
  }

  CriterionId id_;
  double omega_;
  int k_;
  Eigen::VectorXd slope_;  // p(s) * theta(s)
  double offset_ = 0.0;    // PhiE at pi = 0
  double e_abs_ = 0.0;     // E|theta|
  Eigen::VectorXd w_over_p_;
  double s_half_ = 0.0;
};

CompoundTargetResult solve_compound(CriterionId id, const DesignSpace& space,
                                    const Eigen::VectorXd& theta,
                                    const CovariateDistribution& dist, double omega) {
  dist.validate(space);
  if (theta.size() != space.strata_count()) {
    throw std::invalid_argument("compound_target: theta size mismatch");
  }
  if (!(omega >= 0.0) || !(omega < 1.0)) {
    throw std::invalid_argument("compound_target: omega must lie in [0,1)");
  }
  const int k = space.strata_count();
  CompoundObjective obj(id, space, theta, dist, omega);

  CompoundTargetResult out;
  out.omega_value = omega;

  if (obj.e_abs_theta() == 0.0) {
    // No ethical differential anywhere: the compound problem degenerates.
    out.pi_star = balanced_target(space);
    out.degenerate = true;
    out.gradient_residual = 0.0;
    out.efficiencies = efficiencies(id, space, out.pi_star, theta, dist);
    return out;
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(k);  // logit scale, start balanced
  Eigen::VectorXd pi = sigmoid(u);
  double g_value = obj.value(pi);
  Eigen::VectorXd grad(k);
  Eigen::MatrixXd hess(k, k);

  Eigen::VectorXd best_pi = pi;
  double best_resid = std::numeric_limits<double>::infinity();
  int iter = 0;

  for (; iter < kMaxIterations; ++iter) {
    obj.derivatives(pi, grad, hess);
    const double resid = grad.lpNorm<Eigen::Infinity>();
    if (resid < best_resid) {
      best_resid = resid;
      best_pi = pi;
    }
    if (resid <= kGradientTarget) break;

    // chain rule to the logit scale: du pi = pi(1-pi)
    const Eigen::VectorXd s = (pi.array() * (1.0 - pi.array())).matrix();
    Eigen::VectorXd grad_u = grad.cwiseProduct(s);
    Eigen::MatrixXd hess_u = s.asDiagonal() * hess * s.asDiagonal();
    for (int i = 0; i < k; ++i) {
      hess_u(i, i) += grad(i) * s(i) * (1.0 - 2.0 * pi(i));
    }

    // Newton step; Levenberg damping until the factorization yields descent
    Eigen::VectorXd step;
    double lambda = 0.0;
    const double scale = hess_u.diagonal().cwiseAbs().maxCoeff() + 1e-300;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd h = hess_u;
      if (lambda > 0.0) h.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-grad_u);
        if (step.allFinite() && grad_u.dot(step) < 0.0) break;
      }
      lambda = lambda == 0.0 ? 1e-8 * scale : lambda * 10.0;
      step.setZero();
    }
    if (step.isZero(0.0)) step = -grad_u;  // damping failed; fall back to descent direction

    // backtracking halving; a step is also accepted when it shrinks the
    // gradient, which keeps Newton polishing once the objective decrease
    // falls below rounding noise
    const double slope0 = grad_u.dot(step);
    double t = 1.0;
    bool moved = false;
    Eigen::VectorXd grad_try(k);
    Eigen::MatrixXd hess_try(k, k);
    for (int half = 0; half < 60; ++half) {
      const Eigen::VectorXd u_try = u + t * step;
      const Eigen::VectorXd pi_try = sigmoid(u_try);
      const double g_try = obj.value(pi_try);
      if (std::isfinite(g_try)) {
        bool accept = g_try <= g_value + 1e-4 * t * slope0;
        if (!accept && g_try <= g_value + 1e-12 * (1.0 + std::abs(g_value))) {
          obj.derivatives(pi_try, grad_try, hess_try);
          accept = grad_try.lpNorm<Eigen::Infinity>() <= 0.9 * resid;
        }
        if (accept) {
          u = u_try;
          pi = pi_try;
          g_value = g_try;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) break;  // no further progress possible at this precision
  }

  obj.derivatives(pi, grad, hess);
  const double resid = grad.lpNorm<Eigen::Infinity>();
  if (resid < best_resid) {
    best_resid = resid;
    best_pi = pi;
  }
  if (best_resid > kGradientAccept) {
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%.3e", best_resid);
    throw SolverError(std::string("compound target solver stalled at residual ") + detail,
                      best_pi, best_resid);
  }

  out.pi_star = best_pi;
  out.gradient_residual = best_resid;
  out.iterations = iter;
  out.efficiencies = efficiencies(id, space, best_pi, theta, dist);
  return out;
}

}  // namespace

AllocationVector balanced_target(const DesignSpace& space) {
  return AllocationVector::Constant(space.strata_count(), 0.5);
}

AllocationVector ethical_target(const Eigen::VectorXd& theta) {
  AllocationVector pi(theta.size());
  for (Eigen::Index s = 0; s < theta.size(); ++s) {
    pi(s) = theta(s) > 0.0 ? 1.0 : (theta(s) < 0.0 ? 0.0 : 0.5);
  }
  return pi;
}

CompoundTargetResult compound_target(CriterionId id, const DesignSpace& space,
                                     const Eigen::VectorXd& theta,
                                     const CovariateDistribution& dist,
                                     const WeightSpec& spec) {
  dist.validate(space);
  if (theta.size() != space.strata_count()) {
    throw std::invalid_argument("compound_target: theta size mismatch");
  }
  double e_abs = 0.0;
  for (int s = 0; s < space.strata_count(); ++s) e_abs += dist.p(s) * std::abs(theta(s));
  return solve_compound(id, space, theta, dist, weight(spec, e_abs));
}

CompoundTargetResult compound_target_fixed_omega(CriterionId id, const DesignSpace& space,
                                                 const Eigen::VectorXd& theta,
                                                 const CovariateDistribution& dist,
                                                 double omega) {
  return solve_compound(id, space, theta, dist, omega);
}

ConstrainedTargetResult constrained_target(CriterionId id, const DesignSpace& space,
                                           const Eigen::VectorXd& theta,
                                           const CovariateDistribution& dist,
                                           double efficiency_floor) {
  if (!(efficiency_floor > 0.0) || !(efficiency_floor < 1.0)) {
    throw std::invalid_argument("constrained_target: efficiency floor must lie in (0,1)");
  }
  constexpr double kFloorTol = 1e-6;

  // Psi_I of the compound target decreases continuously in omega from 1.
  auto psi_i_at = [&](double omega) {
    return solve_compound(id, space, theta, dist, omega).efficiencies.psi_i;
  };

  double lo = 0.0;  // Psi_I = 1 > floor
  double hi = 0.9;
  bool bracketed = false;
  for (int expand = 0; expand < 10; ++expand) {
    const double psi_hi = psi_i_at(hi);
    if (psi_hi <= efficiency_floor) {
      bracketed = true;
      break;
    }
    lo = hi;
    hi = 1.0 - 0.1 * (1.0 - hi);
    if (1.0 - hi < 1e-9) break;
  }
  if (!bracketed) {
    throw SolverError("constrained_target: floor " + std::to_string(efficiency_floor) +
                          " not bracketed below omega = " + std::to_string(hi),
                      solve_compound(id, space, theta, dist, hi).pi_star,
                      psi_i_at(hi) - efficiency_floor);
  }

  double omega_c = hi;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double psi_mid = psi_i_at(mid);
    if (psi_mid > efficiency_floor) {
      lo = mid;
    } else {
      hi = mid;
    }
    omega_c = 0.5 * (lo + hi);
    if (std::abs(psi_mid - efficiency_floor) <= 0.25 * kFloorTol) {
      omega_c = mid;
      break;
    }
  }

  ConstrainedTargetResult out;
  out.omega_c = omega_c;
  out.target = solve_compound(id, space, theta, dist, omega_c);
  if (std::abs(out.target.efficiencies.psi_i - efficiency_floor) > kFloorTol) {
    throw SolverError("constrained_target: bisection ended at |Psi_I - C| = " +
                          std::to_string(std::abs(out.target.efficiencies.psi_i -
                                                  efficiency_floor)),
                      out.target.pi_star,
                      std::abs(out.target.efficiencies.psi_i - efficiency_floor));
  }
  return out;
}

AllocationVector bandyopadhyay_biswas_target(const Eigen::VectorXd& theta, double t_scale) {
  if (!(t_scale > 0.0)) {
    throw std::invalid_argument("bandyopadhyay_biswas_target: T must be positive");
  }
  AllocationVector pi(theta.size());
  for (Eigen::Index s = 0; s < theta.size(); ++s) pi(s) = normal_cdf(theta(s) / t_scale);
  return pi;
}

}  // namespace rdbcd
