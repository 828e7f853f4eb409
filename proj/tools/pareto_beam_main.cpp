// SPDX-License-Identifier: Apache-2.0
// pareto-beam: configuration-driven experiment runner.
//
//   pareto-beam run <config.json> [--out DIR] [--seeds 1,2,5-9] [--restarts n] [--threads t]
//   pareto-beam verify <config.json> [same options]
//
// Exit status: 0 success, 1 configuration error, 2 invariant failure.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pareto_beam/config.hpp"
#include "pareto_beam/experiments.hpp"

namespace pb = pareto_beam;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> seeds;
  std::optional<int> restarts;
  std::optional<int> threads;
  std::optional<int> weight_points;
  std::optional<std::vector<double>> weights;
  std::optional<double> eps_outer;
  std::optional<double> eps_inner;
  std::optional<double> step_scale;
  std::optional<int> max_outer_iters;
  std::optional<int> max_inner_iters;
  std::optional<int> max_backtracks;
  std::optional<double> rank_threshold;
  std::optional<bool> expand_steps;
  std::optional<bool> conjugate_directions;
  bool audit = false;
  bool quiet = false;
};

template <typename T>
std::string with_default(const std::string& text, const T& value) {
  std::ostringstream ss;
  ss << text << " (default " << value << ")";
  return ss.str();
}

void add_options(CLI::App* cmd, Overrides& o) {
  const pb::SolverConfig d;
  const pb::ExperimentConfig e;
  cmd->add_option("config", o.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (default: the config's \"out\", else out)");
  cmd->add_option("--seeds", o.seeds, "Channel seeds, e.g. 1,2,10-20 (replaces the config list)");
  cmd->add_option("--restarts", o.restarts, with_default("Random restarts per solve", e.restarts))
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, with_default("Worker threads across cells", e.threads))
      ->check(CLI::PositiveNumber);
  cmd->add_option("--weight-points", o.weight_points, with_default("Rate-region grid size on w1", e.weight_points));
  cmd->add_option("--weights", o.weights, "Rate weights, one per pair, summing to 1 (default: equal)")
      ->delimiter(',');
  cmd->add_option("--eps-outer", o.eps_outer, with_default("Outer stopping tolerance on |du|", d.eps_outer));
  cmd->add_option("--eps-inner", o.eps_inner, with_default("Inner stopping tolerance on |du|", d.eps_inner));
  cmd->add_option("--step-scale", o.step_scale, with_default("Trial step factor on the gradient norm", d.step_scale));
  cmd->add_option("--max-outer-iters", o.max_outer_iters, with_default("Outer iteration cap", d.max_outer_iters));
  cmd->add_option("--max-inner-iters", o.max_inner_iters, with_default("Inner iteration cap", d.max_inner_iters));
  cmd->add_option("--max-backtracks", o.max_backtracks, with_default("Step halvings per step", d.max_backtracks));
  cmd->add_option("--rank-threshold", o.rank_threshold,
                  with_default("Stream threshold as a fraction of P_i", d.rank_threshold));
  cmd->add_option("--expand-steps", o.expand_steps, with_default("Double successful U steps (true/false)", "true"));
  cmd->add_option("--conjugate-directions", o.conjugate_directions,
                  with_default("Conjugate U directions (true/false)", "true"));
  cmd->add_flag("--audit", o.audit, "Validate every covariance after each outer iteration");
  cmd->add_flag("-q,--quiet", o.quiet, "Do not print warnings");
}

pb::ExperimentConfig apply(const Overrides& o, std::optional<pb::ExperimentKind> kind) {
  pb::ExperimentConfig cfg = pb::load_config(o.config);
  if (kind) cfg.kind = *kind;
  if (o.out) cfg.out_dir = *o.out;
  if (o.seeds) cfg.seeds = pb::parse_seed_list(*o.seeds);
  if (o.restarts) cfg.restarts = *o.restarts;
  if (o.threads) cfg.threads = *o.threads;
  if (o.weight_points) cfg.weight_points = *o.weight_points;
  if (o.weights) cfg.solver.weights = *o.weights;
  if (o.eps_outer) cfg.solver.eps_outer = *o.eps_outer;
  if (o.eps_inner) cfg.solver.eps_inner = *o.eps_inner;
  if (o.step_scale) cfg.solver.step_scale = *o.step_scale;
  if (o.max_outer_iters) cfg.solver.max_outer_iters = *o.max_outer_iters;
  if (o.max_inner_iters) cfg.solver.max_inner_iters = *o.max_inner_iters;
  if (o.max_backtracks) cfg.solver.max_backtracks = *o.max_backtracks;
  if (o.rank_threshold) cfg.solver.rank_threshold = *o.rank_threshold;
  if (o.expand_steps) cfg.solver.expand_steps = *o.expand_steps;
  if (o.conjugate_directions) cfg.solver.conjugate_directions = *o.conjugate_directions;
  if (o.audit) cfg.solver.audit = true;
  cfg.validate();
  return cfg;
}

int execute(const Overrides& o, std::optional<pb::ExperimentKind> kind) {
  const pb::ExperimentConfig cfg = apply(o, kind);
  const pb::RunSummary summary = pb::run_experiment(cfg);
  if (!o.quiet) {
    for (const std::string& w : summary.warnings) std::cerr << "warning: " << w << "\n";
  }
  for (const std::string& f : summary.failures) std::cerr << "invariant failure: " << f << "\n";
  std::cout << pb::to_string(cfg.kind) << ": " << summary.cells << " cells, " << summary.files.size()
            << " files in " << summary.out_dir.string() << ", " << summary.failures.size()
            << " invariant failure(s)\n";
  return summary.ok() ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto-optimal beam design for MIMO interference channels"};
  app.require_subcommand(1);
  Overrides run_opts;
  Overrides verify_opts;
  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a configuration file");
  CLI::App* verify = app.add_subcommand("verify", "Certify solutions for the scenarios of a configuration file");
  add_options(run, run_opts);
  add_options(verify, verify_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return execute(run_opts, std::nullopt);
    return execute(verify_opts, pb::ExperimentKind::verify);
  } catch (const pb::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  }
}
