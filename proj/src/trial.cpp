#include "rdbcd/trial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rdbcd/rng.hpp"

namespace rdbcd {

namespace {
constexpr double kProportionClamp = 1e-9;
}

void SimulationConfig::validate() const {
  truth.validate(space);
  covariates.validate(space);
  weight.validate();
  if (initial_per_arm < 1) throw std::invalid_argument("SimulationConfig: m must be >= 1");
  if (horizon <= 2 * initial_per_arm) {
    throw std::invalid_argument("SimulationConfig: need n > 2m");
  }
  if (replicates < 1) throw std::invalid_argument("SimulationConfig: h must be >= 1");
  if (!(p_clamp_floor > 0.0)) {
    throw std::invalid_argument("SimulationConfig: clamp floor must be positive");
  }
  for (int c : checkpoints) {
    if (c < 1 || c > horizon) throw std::invalid_argument("SimulationConfig: checkpoint out of range");
  }
}

std::vector<int> SimulationConfig::checkpoint_schedule() const {
  std::vector<int> plan = checkpoints;
  if (plan.empty() && checkpoint_count > 0) {
    for (int k = 1; k <= checkpoint_count; ++k) {
      plan.push_back(static_cast<int>(std::llround(
          static_cast<double>(horizon) * k / checkpoint_count)));
    }
  }
  std::sort(plan.begin(), plan.end());
  plan.erase(std::unique(plan.begin(), plan.end()), plan.end());
  return plan;
}

AllocationVector ReplicateResult::proportions() const {
  AllocationVector pi(subjects.size());
  for (Eigen::Index s = 0; s < subjects.size(); ++s) {
    pi(s) = subjects(s) > 0 ? static_cast<double>(on_a(s)) / subjects(s)
                            : std::numeric_limits<double>::quiet_NaN();
  }
  return pi;
}

namespace {

int draw_stratum(const Eigen::VectorXd& cumulative, double u) {
  // first index with cumulative > u; the last entry absorbs rounding
  const Eigen::Index k = cumulative.size();
  for (Eigen::Index s = 0; s < k - 1; ++s) {
    if (u < cumulative(s)) return static_cast<int>(s);
  }
  return static_cast<int>(k - 1);
}

struct TargetContext {
  const SimulationConfig* config;
  AllocationVector true_target;  // used in diagnostic mode
};

AllocationVector current_target(const TargetContext& ctx, const SequentialOls& fit,
                                const CovariateDistribution& p_hat, TargetFallback* fallback) {
  if (fallback) *fallback = TargetFallback::none;
  if (ctx.config->use_true_parameters) return ctx.true_target;
  return plug_in_target(ctx.config->criterion, ctx.config->space, fit.solve(), p_hat,
                        ctx.config->weight, fallback);
}

}  // namespace

ReplicateResult run_replicate(const SimulationConfig& config, int replicate_index) {
  config.validate();
  const DesignSpace& space = config.space;
  const int k = space.strata_count();
  Rng rng(replicate_seed(config.master_seed, static_cast<std::uint64_t>(replicate_index)));

  Eigen::VectorXd cumulative(k);
  double acc = 0.0;
  for (int s = 0; s < k; ++s) {
    acc += config.covariates.p(s);
    cumulative(s) = acc;
  }

  TargetContext ctx{&config, {}};
  if (config.use_true_parameters) {
    const Eigen::VectorXd theta = theta_surface(space, config.truth);
    ctx.true_target =
        compound_target(config.criterion, space, theta, config.covariates, config.weight)
            .pi_star;
  }

  const std::vector<int> plan = config.checkpoint_schedule();
  std::size_t next_checkpoint = 0;

  SequentialOls fit(space);
  Eigen::VectorXi subjects = Eigen::VectorXi::Zero(k);
  Eigen::VectorXi on_a = Eigen::VectorXi::Zero(k);
  ReplicateResult result;
  const double sd = std::sqrt(config.truth.sigma2);

  bool pair_first_is_a = false;
  for (int i = 0; i < config.horizon; ++i) {
    const int stratum = draw_stratum(cumulative, rng.uniform01());
    const Profile profile = space.profile_of(stratum);

    bool assign_a;
    if (i < 2 * config.initial_per_arm) {
      // randomized permuted pairs: each pair holds one A and one B
      if (i % 2 == 0) {
        pair_first_is_a = rng.bernoulli(0.5);
        assign_a = pair_first_is_a;
      } else {
        assign_a = !pair_first_is_a;
      }
    } else {
      const CovariateDistribution p_hat =
          empirical_distribution(space, fit.counts(), config.p_clamp_floor);
      TargetFallback fallback = TargetFallback::none;
      const AllocationVector target = current_target(ctx, fit, p_hat, &fallback);
      if (fallback == TargetFallback::not_estimable) ++result.not_estimable_fallbacks;
      if (fallback == TargetFallback::solver_error) ++result.solver_failure_fallbacks;

      double prob;
      if (subjects(stratum) == 0) {
        // no proportion to correct yet; follow the target estimate
        prob = target(stratum);
      } else {
        const double x =
            std::clamp(static_cast<double>(on_a(stratum)) / subjects(stratum),
                       kProportionClamp, 1.0 - kProportionClamp);
        const double y = std::clamp(target(stratum), kProportionClamp, 1.0 - kProportionClamp);
        const double z = std::clamp(p_hat.p(stratum), 1e-6, 1.0 - 1e-6);
        prob = config.rule.allocation_probability(x, y, z);
      }
      assign_a = rng.bernoulli(prob);
    }

    const Eigen::VectorXd f = space.regressor(profile);
    const double mean =
        assign_a ? config.truth.mu_a + f.dot(config.truth.beta_a)
                 : config.truth.mu_b + f.dot(config.truth.beta_b);
    const double response = rng.normal(mean, sd);

    ++subjects(stratum);
    if (assign_a) ++on_a(stratum);
    fit.add(profile, assign_a, response);

    if (next_checkpoint < plan.size() && i + 1 == plan[next_checkpoint]) {
      TrajectoryPoint point;
      point.n = i + 1;
      point.subjects = subjects;
      point.on_a = on_a;
      const CovariateDistribution p_hat =
          empirical_distribution(space, fit.counts(), config.p_clamp_floor);
      point.target_hat = current_target(ctx, fit, p_hat, nullptr);
      result.trajectory.push_back(std::move(point));
      ++next_checkpoint;
    }
  }

  result.subjects = subjects;
  result.on_a = on_a;
  const OlsResult ols = fit.solve();
  result.gamma_hat = ols.gamma_hat;
  result.estimable = ols.estimable;
  const CovariateDistribution p_hat =
      empirical_distribution(space, fit.counts(), config.p_clamp_floor);
  result.final_target_hat = current_target(ctx, fit, p_hat, nullptr);
  return result;
}

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<ReplicateResult> run_replicates(const SimulationConfig& config) {
  config.validate();
  std::vector<ReplicateResult> results(config.replicates);
  parallel_for(config.replicates, config.threads,
               [&](int r) { results[r] = run_replicate(config, r); });
  return results;
}

AggregateReport aggregate(const SimulationConfig& config,
                          const std::vector<ReplicateResult>& results) {
  const int k = config.space.strata_count();
  AggregateReport report;
  report.replicates = static_cast<int>(results.size());
  report.horizon = config.horizon;

  const Eigen::VectorXd theta = theta_surface(config.space, config.truth);
  report.true_target =
      compound_target(config.criterion, config.space, theta, config.covariates, config.weight)
          .pi_star;

  report.mean_proportion = AllocationVector::Zero(k);
  report.sd_proportion = AllocationVector::Zero(k);
  report.mean_target_hat = AllocationVector::Zero(k);
  report.sd_target_hat = AllocationVector::Zero(k);
  report.empty_stratum_replicates = Eigen::VectorXi::Zero(k);

  // two-pass mean/sd in fixed replicate order keeps the report bit-stable
  Eigen::VectorXi present = Eigen::VectorXi::Zero(k);
  for (const auto& res : results) {
    const AllocationVector pi = res.proportions();
    for (int s = 0; s < k; ++s) {
      if (std::isnan(pi(s))) {
        ++report.empty_stratum_replicates(s);
      } else {
        ++present(s);
        report.mean_proportion(s) += pi(s);
      }
      report.mean_target_hat(s) += res.final_target_hat(s);
    }
    report.total_not_estimable_fallbacks += res.not_estimable_fallbacks;
    report.total_solver_failures += res.solver_failure_fallbacks;

    double gamma_err = std::abs(res.gamma_hat.mu_a - config.truth.mu_a);
    gamma_err = std::max(gamma_err, std::abs(res.gamma_hat.mu_b - config.truth.mu_b));
    gamma_err = std::max(gamma_err,
                         (res.gamma_hat.beta_a - config.truth.beta_a).cwiseAbs().maxCoeff());
    gamma_err = std::max(gamma_err,
                         (res.gamma_hat.beta_b - config.truth.beta_b).cwiseAbs().maxCoeff());
    report.mean_gamma_max_error += gamma_err;
    report.mean_target_max_error +=
        (res.final_target_hat - report.true_target).cwiseAbs().maxCoeff();
  }
  for (int s = 0; s < k; ++s) {
    report.mean_proportion(s) =
        present(s) > 0 ? report.mean_proportion(s) / present(s)
                       : std::numeric_limits<double>::quiet_NaN();
    report.mean_target_hat(s) /= report.replicates;
  }
  report.mean_gamma_max_error /= report.replicates;
  report.mean_target_max_error /= report.replicates;

  for (const auto& res : results) {
    const AllocationVector pi = res.proportions();
    for (int s = 0; s < k; ++s) {
      if (!std::isnan(pi(s))) {
        const double d = pi(s) - report.mean_proportion(s);
        report.sd_proportion(s) += d * d;
      }
      const double dt = res.final_target_hat(s) - report.mean_target_hat(s);
      report.sd_target_hat(s) += dt * dt;
    }
  }
  for (int s = 0; s < k; ++s) {
    report.sd_proportion(s) =
        present(s) > 1 ? std::sqrt(report.sd_proportion(s) / (present(s) - 1)) : 0.0;
    report.sd_target_hat(s) =
        report.replicates > 1 ? std::sqrt(report.sd_target_hat(s) / (report.replicates - 1))
                              : 0.0;
  }
  return report;
}

AggregateReport run_study(const SimulationConfig& config) {
  return aggregate(config, run_replicates(config));
}

AsymptoticInformation asymptotic_information(const DesignSpace& space,
                                             const AllocationVector& pi_star,
                                             const CovariateDistribution& dist) {
  dist.validate(space);
  const int k = space.strata_count();
  if (pi_star.size() != k) {
    throw std::invalid_argument("asymptotic_information: pi size mismatch");
  }
  for (int s = 0; s < k; ++s) {
    if (!(pi_star(s) > 0.0 && pi_star(s) < 1.0)) {
      throw std::invalid_argument("asymptotic_information: pi must be interior");
    }
  }
  const int j_levels = space.t_levels();
  const int l_levels = space.w_levels();
  const int p = space.regressor_dim();
  const int d = space.model_dim();

  auto mass = [&](const AllocationVector& w, int j, int l) {
    const int s = space.stratum_index(Profile{j, l});
    return w(s) * dist.p(s);
  };

  // marginal allocation-mass vector over the dummy coordinates
  auto marginal_vector = [&](const AllocationVector& w) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    for (int j = 1; j <= j_levels; ++j) {
      double sum = 0.0;
      for (int l = 0; l <= l_levels; ++l) sum += mass(w, j, l);
      v(j - 1) = sum;
    }
    for (int l = 1; l <= l_levels; ++l) {
      double sum = 0.0;
      for (int j = 0; j <= j_levels; ++j) sum += mass(w, j, l);
      v(j_levels + l - 1) = sum;
    }
    for (int j = 1; j <= j_levels; ++j) {
      for (int l = 1; l <= l_levels; ++l) {
        v(j_levels + l_levels + (j - 1) * l_levels + (l - 1)) = mass(w, j, l);
      }
    }
    return v;
  };

  // p x p block for one arm: diagonal marginals, factor cross block, and
  // the interaction rows/columns tied to their own factor level
  auto arm_block = [&](const AllocationVector& w) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    const Eigen::VectorXd v = marginal_vector(w);
    for (int i = 0; i < p; ++i) m(i, i) = v(i);
    for (int j = 1; j <= j_levels; ++j) {
      for (int l = 1; l <= l_levels; ++l) {
        const double cell = mass(w, j, l);
        const int jt = j - 1;
        const int wl = j_levels + l - 1;
        const int inter = j_levels + l_levels + (j - 1) * l_levels + (l - 1);
        m(jt, wl) = m(wl, jt) = cell;
        m(jt, inter) = m(inter, jt) = cell;
        m(wl, inter) = m(inter, wl) = cell;
      }
    }
    return m;
  };

  const AllocationVector complement = AllocationVector::Ones(k) - pi_star;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  double total_a = 0.0;
  for (int s = 0; s < k; ++s) total_a += pi_star(s) * dist.p(s);
  m(0, 0) = total_a;
  m(1, 1) = 1.0 - total_a;
  const Eigen::VectorXd va = marginal_vector(pi_star);
  const Eigen::VectorXd vb = marginal_vector(complement);
  m.block(0, 2, 1, p) = va.transpose();
  m.block(2, 0, p, 1) = va;
  m.block(1, 2 + p, 1, p) = vb.transpose();
  m.block(2 + p, 1, p, 1) = vb;
  m.block(2, 2, p, p) = arm_block(pi_star);
  m.block(2 + p, 2 + p, p, p) = arm_block(complement);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw std::runtime_error("asymptotic_information: singular limit matrix (rank " +
                             std::to_string(lu.rank()) + " of " + std::to_string(d) + ")");
  }
  return AsymptoticInformation{m, lu.inverse()};
}

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double max_stratum_dev(const Eigen::VectorXi& subjects, const Eigen::VectorXi& on_a,
                       const AllocationVector& pi_star) {
  double dev = 0.0;
  bool any = false;
  for (Eigen::Index s = 0; s < subjects.size(); ++s) {
    if (subjects(s) == 0) continue;
    any = true;
    dev = std::max(dev, std::abs(static_cast<double>(on_a(s)) / subjects(s) - pi_star(s)));
  }
  return any ? dev : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ConvergenceDiagnostics convergence_diagnostics(const std::vector<ReplicateResult>& results,
                                               const AllocationVector& pi_star) {
  if (results.empty() || results.front().trajectory.empty()) {
    throw std::invalid_argument("convergence_diagnostics: need trajectory checkpoints");
  }
  const std::size_t points = results.front().trajectory.size();
  for (const auto& res : results) {
    if (res.trajectory.size() != points) {
      throw std::invalid_argument("convergence_diagnostics: inconsistent checkpoint schedules");
    }
  }

  ConvergenceDiagnostics diag;
  for (std::size_t c = 0; c < points; ++c) {
    std::vector<double> pi_dev;
    std::vector<double> target_dev;
    pi_dev.reserve(results.size());
    target_dev.reserve(results.size());
    for (const auto& res : results) {
      const auto& point = res.trajectory[c];
      const double dev = max_stratum_dev(point.subjects, point.on_a, pi_star);
      if (!std::isnan(dev)) pi_dev.push_back(dev);
      target_dev.push_back((point.target_hat - pi_star).cwiseAbs().maxCoeff());
    }
    CheckpointSummary summary;
    summary.n = results.front().trajectory[c].n;
    summary.median_proportion_dev = median_of(std::move(pi_dev));
    summary.median_target_dev = median_of(std::move(target_dev));
    diag.checkpoints.push_back(summary);
  }

  int pi_down = 0;
  int target_down = 0;
  for (std::size_t c = 1; c < points; ++c) {
    if (diag.checkpoints[c].median_proportion_dev <
        diag.checkpoints[c - 1].median_proportion_dev) {
      ++pi_down;
    }
    if (diag.checkpoints[c].median_target_dev < diag.checkpoints[c - 1].median_target_dev) {
      ++target_down;
    }
  }
  if (points > 1) {
    diag.proportion_trend = static_cast<double>(pi_down) / (points - 1);
    diag.target_trend = static_cast<double>(target_down) / (points - 1);
  }

  int improved = 0;
  for (const auto& res : results) {
    const double first = (res.trajectory.front().target_hat - pi_star).cwiseAbs().maxCoeff();
    const double last = (res.trajectory.back().target_hat - pi_star).cwiseAbs().maxCoeff();
    if (last <= first) ++improved;
  }
  diag.improved_fraction = static_cast<double>(improved) / results.size();
  return diag;
}

}  // namespace rdbcd
