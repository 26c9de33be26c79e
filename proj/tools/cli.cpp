#include "cli.hpp"

#include "commands.hpp"
#include "mdmnet/error.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace mdm::cli {

namespace {

void add_grid(CLI::App* cmd, double& start, double& end, double& step) {
  cmd->add_option("--delta-start", start, "Smallest discount on the grid")->capture_default_str();
  cmd->add_option("--delta-end", end, "Largest discount on the grid")->capture_default_str();
  cmd->add_option("--delta-step", step, "Grid spacing")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure learning and diagnostics for multiregression dynamic models", "mdmnet"};
  app.set_config("--config", "", "TOML or INI file with option defaults; command-line flags win");
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic replications");
  simulate->add_option("--preset", sim.preset, "Generator")
      ->required()
      ->check(CLI::IsMember({"appendix-a", "appendix-b"}));
  simulate->add_option("--T", sim.T, "Series length (appendix-a: 230, appendix-b: 100)")->check(CLI::PositiveNumber);
  simulate->add_option("--wstar", sim.wstar, "State innovation scale W* (appendix-b)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--reps", sim.reps, "Replication count (appendix-a: 50, appendix-b: 100)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Compute the local score table");
  score->add_option("--data", sc.data, "Time series CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--out", sc.out, "Score file to write (stdout when omitted)");
  add_grid(score, sc.delta_start, sc.delta_end, sc.delta_step);
  score->add_option("--n0", sc.n0, "Prior degrees of freedom")->capture_default_str();
  score->add_option("--d0", sc.d0, "Prior sum of squares")->capture_default_str();
  score->add_option("--cstar", sc.cstar, "Prior scaled covariance multiplier")->capture_default_str();
  score->add_option("--max-parents", sc.max_parents, "Largest parent set scored")->check(CLI::NonNegativeNumber);
  score->add_flag("--prune", sc.prune, "Drop entries dominated by a subset");
  score->add_option("--threads", sc.threads, "Worker threads (0: MDMNET_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  SearchArgs se;
  auto* search = app.add_subcommand("search", "Find the highest-scoring DAG");
  search->add_option("--scores", se.scores, "Score file")->required()->check(CLI::ExistingFile);
  search->add_option("--engine", se.engine, "ip, dp, or both (asserts equal scores)")
      ->capture_default_str()
      ->check(CLI::IsMember({"ip", "dp", "both"}));
  search->add_option("--time-limit", se.time_limit, "Integer program time limit in seconds")->capture_default_str();
  search->add_option("--node-limit", se.node_limit, "Integer program branch node limit")->capture_default_str();
  search->add_flag("--no-prune", se.no_prune, "Keep dominated score entries in the integer program");
  search->add_option("--out", se.out_prefix, "Write PREFIX.edges, PREFIX.dot and PREFIX.json");

  DiagnoseArgs dg;
  auto* diagnose = app.add_subcommand("diagnose", "Monitor a fitted network and optionally embellish it");
  diagnose->add_option("--data", dg.data, "Time series CSV")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--dag", dg.dag, "Edge list or search report")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--node", dg.node, "Single node to examine (1-based; 0 for all)")->capture_default_str();
  diagnose->add_option("--out", dg.out_dir, "Output directory")->required();
  diagnose->add_option("--threshold", dg.threshold, "Change-point Bayes factor threshold")->capture_default_str();
  diagnose->add_option("--cp-mode", dg.cp_mode, "cumulative or instantaneous")
      ->capture_default_str()
      ->check(CLI::IsMember({"cumulative", "instantaneous"}));
  diagnose->add_option("--refractory", dg.refractory, "Steps ignored after a change point")->capture_default_str();
  diagnose->add_option("--burn-in", dg.burn_in, "Leading steps ignored by monitors")->capture_default_str();
  diagnose->add_option("--inflation", dg.inflation, "Prior inflation at change points")->capture_default_str();
  diagnose->add_option("--gamma", dg.gamma, "Power of the heteroscedastic variance law")->capture_default_str();
  diagnose->add_option("--embellish", dg.embellish, "Comma list of lag1, changepoints, log, heteroscedastic")
      ->delimiter(',')
      ->check(CLI::IsMember({"lag1", "changepoints", "log", "heteroscedastic"}));
  add_grid(diagnose, dg.delta_start, dg.delta_end, dg.delta_step);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score estimated networks against the truth or across a group");
  evaluate->add_option("--truth", ev.truth, "True graph: manifest, search report or edge list")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--estimates", ev.estimates, "Estimated graphs, one per replication or subject")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--nodes", ev.nodes, "Node count for bare edge lists")->check(CLI::PositiveNumber);
  evaluate->add_flag("--group", ev.group, "Edge prevalence with false discovery rate control");
  evaluate->add_option("--alpha", ev.alpha, "False discovery rate")->capture_default_str();
  evaluate->add_option("--out", ev.out_prefix, "Write PREFIX_*.csv and PREFIX_summary.json (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Context ctx{out, err, quiet};
  try {
    if (*simulate) cmd_simulate(sim, ctx);
    else if (*score) cmd_score(sc, ctx);
    else if (*search) cmd_search(se, ctx);
    else if (*diagnose) cmd_diagnose(dg, ctx);
    else if (*evaluate) {
      if (!ev.group && ev.truth.empty()) throw InvalidArgument("--truth is required unless --group is given");
      cmd_evaluate(ev, ctx);
    }
  } catch (const ParseError& e) {
    err << "mdmnet: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const InvalidArgument& e) {
    err << "mdmnet: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceError& e) {
    err << "mdmnet: resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const NumericalError& e) {
    err << "mdmnet: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const EngineMismatch& e) {
    err << "mdmnet: " << e.what() << '\n';
    return kEngineMismatch;
  } catch (const std::exception& e) {
    err << "mdmnet: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace mdm::cli
