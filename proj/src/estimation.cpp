#include "rdbcd/estimation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace rdbcd {

SequentialOls::SequentialOls(const DesignSpace& space) : space_(space) {
  const int k = space.strata_count();
  const int p = space.regressor_dim();
  const int d = space.model_dim();
  cell_x_.reserve(2 * k);
  for (int s = 0; s < k; ++s) {
    const Eigen::VectorXd f = space.regressor(space.profile_of(s));
    Eigen::VectorXd xa = Eigen::VectorXd::Zero(d);
    xa(0) = 1.0;
    xa.segment(2, p) = f;
    Eigen::VectorXd xb = Eigen::VectorXd::Zero(d);
    xb(1) = 1.0;
    xb.segment(2 + p, p) = f;
    cell_x_.push_back(std::move(xa));
    cell_x_.push_back(std::move(xb));
  }
  cell_count_ = Eigen::VectorXd::Zero(2 * k);
  cell_ysum_ = Eigen::VectorXd::Zero(2 * k);
}

void SequentialOls::add(const Profile& profile, bool assigned_a, double response) {
  const int cell = 2 * space_.stratum_index(profile) + (assigned_a ? 0 : 1);
  cell_count_(cell) += 1.0;
  cell_ysum_(cell) += response;
  yy_ += response * response;
  ++n_;
}

OlsResult SequentialOls::solve() const {
  if (n_ == 0) throw std::invalid_argument("SequentialOls: no observations");
  const int d = space_.model_dim();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
  for (std::size_t c = 0; c < cell_x_.size(); ++c) {
    if (cell_count_(c) == 0.0) continue;
    xtx.noalias() += cell_count_(c) * cell_x_[c] * cell_x_[c].transpose();
    xty.noalias() += cell_ysum_(c) * cell_x_[c];
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xtx);
  cod.setThreshold(1e-10);
  const Eigen::VectorXd gamma = cod.solve(xty);
  const int rank = static_cast<int>(cod.rank());

  OlsResult out;
  out.estimable = rank == d;
  const int p = space_.regressor_dim();
  out.gamma_hat.mu_a = gamma(0);
  out.gamma_hat.mu_b = gamma(1);
  out.gamma_hat.beta_a = gamma.segment(2, p);
  out.gamma_hat.beta_b = gamma.segment(2 + p, p);
  // residual mean square, reported only (targets do not need it)
  const double rss = yy_ - 2.0 * gamma.dot(xty) + gamma.dot(xtx * gamma);
  out.gamma_hat.sigma2 = n_ > rank ? std::max(rss, 0.0) / (n_ - rank) : 1.0;
  if (out.gamma_hat.sigma2 <= 0.0) out.gamma_hat.sigma2 = 1e-300;
  return out;
}

StratumCounts SequentialOls::counts() const {
  const int k = space_.strata_count();
  StratumCounts c;
  c.subjects = Eigen::VectorXi::Zero(k);
  c.on_a = Eigen::VectorXi::Zero(k);
  for (int s = 0; s < k; ++s) {
    const int na = static_cast<int>(cell_count_(2 * s));
    const int nb = static_cast<int>(cell_count_(2 * s + 1));
    c.subjects(s) = na + nb;
    c.on_a(s) = na;
  }
  return c;
}

OlsResult ols_estimate(const DesignSpace& space, const TrialHistory& history) {
  if (history.empty()) throw std::invalid_argument("ols_estimate: empty history");
  SequentialOls fit(space);
  for (const auto& rec : history) fit.add(rec.profile, rec.assigned_a, rec.response);
  return fit.solve();
}

namespace {

CovariateDistribution clamp_frequencies(Eigen::VectorXd freq, double floor) {
  if (!(floor > 0.0) || !(floor < 1.0 / static_cast<double>(freq.size()))) {
    throw std::invalid_argument("empirical_distribution: clamp floor out of range");
  }
  // Water-filling: clamped entries sit exactly at the floor, the free mass
  // is rescaled; repeat in case rescaling pushes another entry below.
  const Eigen::Index k = freq.size();
  std::vector<bool> clamped(k, false);
  for (int pass = 0; pass < k; ++pass) {
    double clamped_mass = 0.0;
    double free_mass = 0.0;
    for (Eigen::Index s = 0; s < k; ++s) {
      if (clamped[s]) {
        clamped_mass += floor;
      } else {
        free_mass += freq(s);
      }
    }
    const double scale = (1.0 - clamped_mass) / free_mass;
    bool changed = false;
    for (Eigen::Index s = 0; s < k; ++s) {
      if (clamped[s]) continue;
      if (freq(s) * scale < floor) {
        clamped[s] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (Eigen::Index s = 0; s < k; ++s) {
        freq(s) = clamped[s] ? floor : freq(s) * scale;
      }
      break;
    }
  }
  return CovariateDistribution{std::move(freq)};
}

}  // namespace

CovariateDistribution empirical_distribution(const DesignSpace& space,
                                             const StratumCounts& counts,
                                             double clamp_floor) {
  counts.validate(space);
  const long long n = counts.total();
  if (n == 0) throw std::invalid_argument("empirical_distribution: no subjects");
  return clamp_frequencies(counts.subjects.cast<double>() / static_cast<double>(n),
                           clamp_floor);
}

CovariateDistribution empirical_distribution(const DesignSpace& space,
                                             const TrialHistory& history,
                                             double clamp_floor) {
  if (history.empty()) throw std::invalid_argument("empirical_distribution: empty history");
  StratumCounts c;
  c.subjects = Eigen::VectorXi::Zero(space.strata_count());
  c.on_a = Eigen::VectorXi::Zero(space.strata_count());
  for (const auto& rec : history) {
    const int s = space.stratum_index(rec.profile);
    ++c.subjects(s);
    if (rec.assigned_a) ++c.on_a(s);
  }
  return empirical_distribution(space, c, clamp_floor);
}

AllocationVector plug_in_target(CriterionId id, const DesignSpace& space,
                                const OlsResult& ols, const CovariateDistribution& p_hat,
                                const WeightSpec& spec, TargetFallback* fallback) {
  if (fallback) *fallback = TargetFallback::none;
  if (!ols.estimable) {
    if (fallback) *fallback = TargetFallback::not_estimable;
    return balanced_target(space);
  }
  const Eigen::VectorXd theta_hat = theta_surface(space, ols.gamma_hat);
  try {
    return compound_target(id, space, theta_hat, p_hat, spec).pi_star;
  } catch (const SolverError&) {
    if (fallback) *fallback = TargetFallback::solver_error;
    return balanced_target(space);
  }
}

EstimateSnapshot estimate_snapshot(CriterionId id, const DesignSpace& space,
                                   const SequentialOls& fit, const WeightSpec& spec,
                                   double clamp_floor) {
  EstimateSnapshot snap;
  const OlsResult ols = fit.solve();
  snap.gamma_hat = ols.gamma_hat;
  snap.estimable = ols.estimable;
  snap.p_hat = empirical_distribution(space, fit.counts(), clamp_floor);
  snap.target_hat = plug_in_target(id, space, ols, snap.p_hat, spec, &snap.target_fallback);
  return snap;
}

}  // namespace rdbcd
