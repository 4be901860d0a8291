#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "amdp/cli.hpp"

namespace {

void add_instance_flags(CLI::App* cmd, amdp::cli::Options& o) {
  cmd->add_option("--mdp", o.mdp_paths, "MDP JSON file")->expected(0, -1);
  cmd->add_option("--variant", o.variant, "hard instance variant (M0|M1|MKL)");
  cmd->add_option("--S", o.S, "number of states of the hard instance");
  cmd->add_option("--A", o.A, "number of actions of the hard instance");
  cmd->add_option("--D", o.D, "diameter parameter of the hard instance");
  cmd->add_option("--k", o.k, "perturbed component (MKL)");
  cmd->add_option("--l", o.l, "perturbed action (MKL)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-reward MDP lab: exact solvers, certificates, hard instances, reductions"};
  app.require_subcommand(1);
  amdp::cli::Options o;
  std::string kind;

  auto* solve = app.add_subcommand("solve", "solve an MDP exactly");
  solve->add_option("kind", kind, "dmdp or amdp")->required();
  add_instance_flags(solve, o);
  solve->add_option("--gamma", o.gamma, "discount factor (dmdp)");
  solve->add_option("--method", o.method, "enumerate or relative_vi (amdp)");
  solve->add_option("--out", o.out, "output directory");

  auto* params = app.add_subcommand("params", "diameter, mixing time and bias span");
  add_instance_flags(params, o);
  params->add_option("--out", o.out, "output directory");

  auto* hardgen = app.add_subcommand("hardgen", "write a hard instance");
  add_instance_flags(hardgen, o);
  hardgen->add_option("--epsilon", o.epsilon, "construction epsilon (default 1/32)");
  hardgen->add_option("--out", o.out, "output file")->required();

  auto* certify = app.add_subcommand("certify", "run every certificate");
  add_instance_flags(certify, o);
  certify->add_option("--epsilon", o.epsilon, "accuracy target (default 0.25)");
  certify->add_option("--count", o.count, "random corpus size");
  certify->add_option("--smax", o.smax, "corpus max states");
  certify->add_option("--amax", o.amax, "corpus max actions");
  certify->add_option("--seed", o.seed, "corpus seed");
  certify->add_option("--out", o.out, "output directory");

  auto* reduce = app.add_subcommand("reduce", "one run of the sample-based solver");
  add_instance_flags(reduce, o);
  reduce->add_option("--epsilon", o.epsilon, "accuracy target (default 0.25)");
  reduce->add_option("--delta", o.delta, "failure probability");
  reduce->add_option("--H", o.H, "bias span bound or 'oracle'");
  reduce->add_option("--N", o.N, "samples per state-action pair")->delimiter(',');
  reduce->add_option("--seed", o.seed, "RNG seed");
  reduce->add_option("--out", o.out, "output directory");

  auto* experiment = app.add_subcommand("experiment", "N x seed sweep");
  add_instance_flags(experiment, o);
  experiment->add_option("--epsilon", o.epsilon, "accuracy target (default 0.25)");
  experiment->add_option("--delta", o.delta, "failure probability");
  experiment->add_option("--H", o.H, "bias span bound or 'oracle'");
  experiment->add_option("--N", o.N, "comma-separated sample counts")->delimiter(',');
  experiment->add_option("--seed", o.seed, "master seed");
  experiment->add_option("--trials", o.trials, "number of seeds");
  experiment->add_option("--out", o.out, "output directory")->required();
  experiment->add_flag("--timing", o.timing, "record wallclock_ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return amdp::cli::kInvalidInput;
  }

  if (*solve) return amdp::cli::solve(kind, o, std::cout, std::cerr);
  if (*params) return amdp::cli::params(o, std::cout, std::cerr);
  if (*hardgen) return amdp::cli::hardgen(o, std::cout, std::cerr);
  if (*certify) return amdp::cli::certify(o, std::cout, std::cerr);
  if (*reduce) return amdp::cli::reduce(o, std::cout, std::cerr);
  return amdp::cli::experiment(o, std::cout, std::cerr);
}
