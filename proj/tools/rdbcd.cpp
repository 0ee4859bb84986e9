#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rdbcd/config.hpp"
#include "rdbcd/golden.hpp"
#include "rdbcd/table_io.hpp"
#include "rdbcd/targets.hpp"
#include "rdbcd/trial.hpp"

using namespace rdbcd;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<int> threads;
  std::string out_dir;
};

std::filesystem::path output_dir(const RunConfig& config, const CommonOptions& opts) {
  std::filesystem::path dir = opts.out_dir.empty()
                                  ? (config.out_dir.empty() ? "." : config.out_dir)
                                  : opts.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string vector_json(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_number(v(i));
  }
  return out + "]";
}

std::string vector_json(const Eigen::VectorXi& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v(i));
  }
  return out + "]";
}

int run_target(const CommonOptions& opts) {
  const RunConfig config = load_config_file(opts.config_path);
  const DesignSpace space = config.space();
  const CovariateDistribution dist = config.covariates();
  const Eigen::VectorXd theta = theta_surface(space, config.model);
  const CompoundTargetResult result =
      compound_target(config.criterion, space, theta, dist, config.weight);

  CsvTable table({"stratum", "t_level", "w_level", "theta", "p", "pi_star", "psi_e", "psi_i",
                  "omega", "residual", "degenerate"});
  std::ostringstream jsonl;
  const std::string psi_e = result.efficiencies.psi_e
                                ? format_number(*result.efficiencies.psi_e)
                                : "nan";
  for (int s = 0; s < space.strata_count(); ++s) {
    const Profile z = space.profile_of(s);
    table.add_row({std::to_string(s), std::to_string(z.t), std::to_string(z.w),
                   format_number(theta(s)), format_number(dist.p(s)),
                   format_number(result.pi_star(s)), psi_e,
                   format_number(result.efficiencies.psi_i), format_number(result.omega_value),
                   format_number(result.gradient_residual), result.degenerate ? "1" : "0"});
    jsonl << "{\"stratum\":" << s << ",\"t_level\":" << z.t << ",\"w_level\":" << z.w
          << ",\"theta\":" << format_number(theta(s)) << ",\"p\":" << format_number(dist.p(s))
          << ",\"pi_star\":" << format_number(result.pi_star(s)) << "}\n";
  }
  const auto dir = output_dir(config, opts);
  table.write_file((dir / "targets.csv").string());
  write_text(dir / "targets.jsonl", jsonl.str());
  std::cout << table.str();
  std::cout << "# criterion=" << to_string(config.criterion)
            << " omega=" << format_number(result.omega_value)
            << " residual=" << format_number(result.gradient_residual) << "\n";
  return 0;
}

int run_constrained(const CommonOptions& opts, std::optional<double> floor_override) {
  const RunConfig config = load_config_file(opts.config_path);
  std::optional<double> floor = floor_override ? floor_override : config.efficiency_floor;
  if (!floor) {
    std::cerr << "constrained: no efficiency floor (set /constrained/efficiency_floor or "
                 "--floor)\n";
    return 2;
  }
  const DesignSpace space = config.space();
  const CovariateDistribution dist = config.covariates();
  const Eigen::VectorXd theta = theta_surface(space, config.model);
  const ConstrainedTargetResult result =
      constrained_target(config.criterion, space, theta, dist, *floor);

  CsvTable table({"stratum", "theta", "p", "pi_star", "psi_e", "psi_i", "omega_c", "floor"});
  std::ostringstream jsonl;
  for (int s = 0; s < space.strata_count(); ++s) {
    table.add_row({std::to_string(s), format_number(theta(s)), format_number(dist.p(s)),
                   format_number(result.target.pi_star(s)),
                   result.target.efficiencies.psi_e
                       ? format_number(*result.target.efficiencies.psi_e)
                       : "nan",
                   format_number(result.target.efficiencies.psi_i),
                   format_number(result.omega_c), format_number(*floor)});
    jsonl << "{\"stratum\":" << s << ",\"theta\":" << format_number(theta(s))
          << ",\"p\":" << format_number(dist.p(s))
          << ",\"pi_star\":" << format_number(result.target.pi_star(s))
          << ",\"omega_c\":" << format_number(result.omega_c) << "}\n";
  }
  const auto dir = output_dir(config, opts);
  table.write_file((dir / "constrained.csv").string());
  write_text(dir / "constrained.jsonl", jsonl.str());
  std::cout << table.str();
  std::cout << "# omega_c=" << format_number(result.omega_c) << "\n";
  return 0;
}

SimulationConfig make_simulation(const RunConfig& config, const CommonOptions& opts) {
  RunConfig adjusted = config;
  if (opts.seed) adjusted.sim.seed = *opts.seed;
  if (opts.replicates) adjusted.sim.replicates = *opts.replicates;
  if (opts.threads) adjusted.sim.threads = *opts.threads;
  return adjusted.simulation();
}

int run_simulate(const CommonOptions& opts) {
  const RunConfig config = load_config_file(opts.config_path);
  const SimulationConfig sim = make_simulation(config, opts);
  const std::vector<ReplicateResult> results = run_replicates(sim);
  const AggregateReport report = aggregate(sim, results);

  CsvTable table({"stratum", "true_target", "mean_proportion", "sd_proportion",
                  "mean_target_hat", "sd_target_hat", "empty_replicates"});
  for (int s = 0; s < sim.space.strata_count(); ++s) {
    table.add_row({std::to_string(s), format_number(report.true_target(s)),
                   format_number(report.mean_proportion(s)),
                   format_number(report.sd_proportion(s)),
                   format_number(report.mean_target_hat(s)),
                   format_number(report.sd_target_hat(s)),
                   std::to_string(report.empty_stratum_replicates(s))});
  }
  std::ostringstream jsonl;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    jsonl << "{\"replicate\":" << r << ",\"subjects\":" << vector_json(res.subjects)
          << ",\"on_a\":" << vector_json(res.on_a)
          << ",\"proportions\":" << vector_json(res.proportions())
          << ",\"target_hat\":" << vector_json(res.final_target_hat)
          << ",\"estimable\":" << (res.estimable ? "true" : "false")
          << ",\"not_estimable_fallbacks\":" << res.not_estimable_fallbacks
          << ",\"solver_failure_fallbacks\":" << res.solver_failure_fallbacks << "}\n";
  }
  const auto dir = output_dir(config, opts);
  table.write_file((dir / "simulation.csv").string());
  write_text(dir / "replicates.jsonl", jsonl.str());
  std::cout << table.str();
  std::cout << "# replicates=" << report.replicates
            << " solver_failures=" << report.total_solver_failures << "\n";
  return 0;
}

struct CheckCounter {
  int passed = 0;
  int failed = 0;

  void tally(bool ok) { ok ? ++passed : ++failed; }
};

int run_tables(const std::string& only, bool fast, const std::string& out_dir, int threads) {
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  CheckCounter counter;
  const DesignSpace space = golden::binary_space();

  if (only.empty() || only == "targets") {
    CheckCounter local;
    CsvTable table({"table", "criterion", "weight", "distribution", "params", "stratum",
                    "expected", "computed", "abs_diff", "tolerance", "status"});
    const double tolerance = 5e-4;
    for (const auto& row : golden::target_rows()) {
      const CovariateDistribution dist = golden::distribution(row.uniform);
      const Eigen::VectorXd theta = golden::theta_of(row.first_params);
      const auto result = compound_target(row.criterion, space, theta, dist,
                                          golden::weight_by_name(row.weight_name));
      for (int s = 0; s < 4; ++s) {
        const double diff = std::abs(result.pi_star(s) - row.expected_pi[s]);
        const bool ok = diff <= tolerance;
        local.tally(ok);
        table.add_row({std::to_string(row.table), to_string(row.criterion), row.weight_name,
                       row.uniform ? "uniform" : "skewed",
                       row.first_params ? "(1;1,1,1)" : "(-4;-1,3,3)", std::to_string(s),
                       format_number(row.expected_pi[s]), format_number(result.pi_star(s)),
                       format_number(diff), format_number(tolerance), ok ? "pass" : "FAIL"});
      }
    }
    table.write_file((dir / "tables_targets.csv").string());
    std::cout << "targets: " << local.passed << " passed, " << local.failed
              << " failed (see tables_targets.csv)\n";
    counter.passed += local.passed;
    counter.failed += local.failed;
  }

  if (only.empty() || only == "constrained") {
    CheckCounter local;
    CsvTable table({"row", "quantity", "expected", "computed", "abs_diff", "tolerance",
                    "status"});
    const Eigen::VectorXd theta = golden::theta_of(true);
    const CovariateDistribution uniform = golden::distribution(true);
    auto add_check = [&](const std::string& row, const std::string& quantity, double expected,
                         double computed, double tolerance) {
      const double diff = std::abs(computed - expected);
      const bool ok = diff <= tolerance;
      local.tally(ok);
      table.add_row({row, quantity, format_number(expected), format_number(computed),
                     format_number(diff), format_number(tolerance), ok ? "pass" : "FAIL"});
    };
    for (const auto& row : golden::constrained_rows()) {
      const std::string name = "floor=" + format_number(row.floor);
      const auto result = constrained_target(CriterionId::C1, space, theta, uniform, row.floor);
      add_check(name, "omega_c", row.expected_omega, result.omega_c, 1e-3);
      for (int s = 0; s < 4; ++s) {
        add_check(name, "pi_star[" + std::to_string(s) + "]", row.expected_pi[s],
                  result.target.pi_star(s), 1e-3);
      }
      add_check(name, "psi_e", row.expected_psi_e, *result.target.efficiencies.psi_e, 0.01);
      add_check(name, "psi_i", row.floor, result.target.efficiencies.psi_i, 1e-6);
    }
    for (const auto& row : golden::comparator_rows()) {
      const std::string name = "comparator T=" + format_number(row.t_scale);
      const AllocationVector pi = bandyopadhyay_biswas_target(theta, row.t_scale);
      for (int s = 0; s < 4; ++s) {
        add_check(name, "pi[" + std::to_string(s) + "]", row.expected_pi[s], pi(s), 1e-3);
      }
      const EfficiencyPair eff = efficiencies(CriterionId::C1, space, pi, theta, uniform);
      add_check(name, "psi_e", row.expected_psi_e, *eff.psi_e, 0.01);
      // reference efficiencies are printed truncated to two decimals, and to
      // an order of magnitude for the smallest one
      add_check(name, "psi_i", row.expected_psi_i, eff.psi_i,
                row.expected_psi_i <= 1e-5 ? 1e-6 : 0.01);
    }
    table.write_file((dir / "tables_constrained.csv").string());
    std::cout << "constrained: " << local.passed << " passed, " << local.failed
              << " failed (see tables_constrained.csv)\n";
    counter.passed += local.passed;
    counter.failed += local.failed;
  }

  if (only.empty() || only == "sim") {
    CheckCounter local;
    const int replicates = fast ? 100 : 500;
    const double mean_tol = fast ? 0.03 : 0.02;
    CsvTable table({"table", "rule", "stratum", "expected_mean", "mean", "mean_diff",
                    "mean_tol", "expected_sd", "sd", "sd_rel_err", "status"});
    std::map<int, AllocationVector> zhang_sd;
    std::map<int, AllocationVector> baz2_sd;
    for (const auto& cell : golden::simulation_cells()) {
      const SimulationConfig config = golden::simulation_config(cell, replicates, threads);
      const AggregateReport report = run_study(config);
      if (std::string(cell.rule_name) == "zhang_cara") zhang_sd[cell.table] = report.sd_proportion;
      if (std::string(cell.rule_name) == "baz2") baz2_sd[cell.table] = report.sd_proportion;
      for (int s = 0; s < 4; ++s) {
        const double mean_diff = std::abs(report.mean_proportion(s) - cell.expected_mean[s]);
        const double sd_rel = std::abs(report.sd_proportion(s) - cell.expected_sd[s]) /
                              cell.expected_sd[s];
        const bool ok = mean_diff <= mean_tol && sd_rel <= 0.5;
        local.tally(ok);
        table.add_row({std::to_string(cell.table), cell.rule_name, std::to_string(s),
                       format_number(cell.expected_mean[s]),
                       format_number(report.mean_proportion(s)), format_number(mean_diff),
                       format_number(mean_tol), format_number(cell.expected_sd[s]),
                       format_number(report.sd_proportion(s)), format_number(sd_rel),
                       ok ? "pass" : "FAIL"});
      }
    }
    // the target-following rule is noisier than the step rule in every scenario
    for (const auto& [table_id, sd] : zhang_sd) {
      for (int s = 0; s < 4; ++s) {
        local.tally(sd(s) > baz2_sd.at(table_id)(s));
      }
    }
    table.write_file((dir / "tables_sim.csv").string());
    std::cout << "sim (" << (fast ? "fast" : "full") << "): " << local.passed << " passed, "
              << local.failed << " failed (see tables_sim.csv)\n";
    counter.passed += local.passed;
    counter.failed += local.failed;
  }

  std::cout << (counter.failed == 0 ? "ALL CHECKS PASSED" : "CHECKS FAILED") << " ("
            << counter.passed << "/" << (counter.passed + counter.failed) << ")\n";
  return counter.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compound-optimal allocation targets and covariate-adjusted "
               "response-adaptive trial simulation"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::optional<double> floor_override;
  std::string only;
  bool fast = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "configuration file")->required();
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--replicates", opts.replicates, "override the replicate count");
    cmd->add_option("--threads", opts.threads, "replicate parallelism (0 = hardware)");
    cmd->add_option("--out", opts.out_dir, "output directory");
  };

  auto* target_cmd = app.add_subcommand("target", "compute the compound-optimal target");
  add_common(target_cmd);
  auto* constrained_cmd =
      app.add_subcommand("constrained", "most ethical target at a fixed inferential efficiency");
  add_common(constrained_cmd);
  constrained_cmd->add_option("--floor", floor_override,
                              "inferential efficiency floor in (0,1)");
  auto* simulate_cmd = app.add_subcommand("simulate", "run a replicated trial study");
  add_common(simulate_cmd);
  auto* tables_cmd =
      app.add_subcommand("tables", "re-derive the bundled reference tables and diff them");
  tables_cmd->add_option("--only", only, "restrict to one group")
      ->check(CLI::IsMember({"targets", "constrained", "sim"}));
  tables_cmd->add_flag("--fast", fast, "simulation group with 100 replicates and tolerance 0.03");
  tables_cmd->add_option("--out", opts.out_dir, "output directory");
  int tables_threads = 0;
  tables_cmd->add_option("--threads", tables_threads, "replicate parallelism (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (target_cmd->parsed()) return run_target(opts);
    if (constrained_cmd->parsed()) return run_constrained(opts, floor_override);
    if (simulate_cmd->parsed()) return run_simulate(opts);
    if (tables_cmd->parsed()) return run_tables(only, fast, opts.out_dir, tables_threads);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (best residual " << e.residual << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
