#pragma once

#include "mdmnet/dag.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdm::cli {

/// `--engine both` found different optimal scores.
class EngineMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
};

struct SimulateArgs {
  std::string preset;
  std::optional<int> T;
  double wstar = 0.001;
  std::optional<int> reps;
  std::uint64_t seed = 1;
  std::string out_dir;
};

struct ScoreArgs {
  std::string data;
  std::string out;
  double delta_start = 0.5;
  double delta_end = 1.0;
  double delta_step = 0.01;
  double n0 = 0.001;
  double d0 = 0.001;
  double cstar = 3.0;
  std::optional<int> max_parents;
  bool prune = false;
  int threads = 0;
};

struct SearchArgs {
  std::string scores;
  std::string engine = "ip";
  double time_limit = 600.0;
  long node_limit = 1000000;
  bool no_prune = false;
  std::string out_prefix;
};

struct DiagnoseArgs {
  std::string data;
  std::string dag;
  int node = 0;
  std::string out_dir;
  double threshold = 0.3;
  std::string cp_mode = "cumulative";
  int refractory = 10;
  int burn_in = 10;
  double inflation = 100.0;
  double gamma = 2.0;
  std::vector<std::string> embellish;
  double delta_start = 0.5;
  double delta_end = 1.0;
  double delta_step = 0.01;
};

struct EvaluateArgs {
  std::string truth;
  std::vector<std::string> estimates;
  std::optional<int> nodes;
  bool group = false;
  double alpha = 0.05;
  std::string out_prefix;
};

void cmd_simulate(const SimulateArgs& a, Context& ctx);
void cmd_score(const ScoreArgs& a, Context& ctx);
void cmd_search(const SearchArgs& a, Context& ctx);
void cmd_diagnose(const DiagnoseArgs& a, Context& ctx);
void cmd_evaluate(const EvaluateArgs& a, Context& ctx);

/// Reads a graph from a search report or manifest (.json) or an edge list.
/// Edge lists need `n`.
Dag load_dag(const std::string& path, std::optional<int> n);

}  // namespace mdm::cli
