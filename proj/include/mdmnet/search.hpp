#pragma once

// Structure search over a score table: choose one parent set per node so the
// summed local scores are maximal and the induced digraph is acyclic.

#include "mdmnet/dag.hpp"
#include "mdmnet/lp.hpp"
#include "mdmnet/scores.hpp"

#include <string>
#include <vector>

namespace mdm {

enum class SearchStatus { Optimal, TimeLimit, NodeLimit };

const char* to_string(SearchStatus s);

struct SearchTelemetry {
  long lp_solves = 0;
  long simplex_iterations = 0;
  long cuts_added = 0;
  long cut_rounds = 0;
  long branch_nodes = 0;
  int max_depth = 0;
  double seconds = 0.0;
  /// LP objective after each cut round at the root.
  std::vector<double> root_bounds;
};

struct SearchResult {
  Dag dag;
  /// Sum of the selected table entries in node order.
  double score = 0.0;
  /// Discount of each selected entry.
  std::vector<double> best_delta;
  SearchStatus status = SearchStatus::Optimal;
  /// Best remaining LP bound; equals score when optimal.
  double upper_bound = 0.0;
  SearchTelemetry telemetry;

  bool proven_optimal() const { return status == SearchStatus::Optimal; }
};

/// Exact best-sink subset recursion. Throws ResourceError for n > 20.
SearchResult dp_exact_search(const ScoreTable& table);

/// One binary variable per score-table entry.
struct IpVariable {
  int node = 0;
  ParentSet parents;
  double objective = 0.0;
};

/// Variables plus the pool of cluster rows. Convexity rows (one per node) are
/// implicit.
struct IpModel {
  int n = 0;
  std::vector<IpVariable> vars;
  /// Indices into vars, grouped by node.
  std::vector<std::vector<int>> by_node;
  std::vector<ParentSet> clusters;

  static IpModel from_table(const ScoreTable& table);
  /// True when the cluster is already pooled.
  bool has_cluster(ParentSet c) const;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  long iterations = 0;
};

/// Solves the relaxation with every variable in [0, 1]. `disabled[i]` fixes
/// variable i to zero.
LpSolution solve_lp_relaxation(const IpModel& model, const std::vector<char>* disabled = nullptr);

/// Left-hand side of the cluster row: mass of entries r in C with S and C
/// disjoint.
double cluster_activity(const IpModel& model, const std::vector<double>& values, ParentSet cluster);

/// Clusters of size >= 2 whose activity is below 1 - tol, most violated first
/// (ties by bitmask), at most max_cuts of them.
std::vector<ParentSet> separate_clusters(const IpModel& model, const std::vector<double>& values, int max_cuts = 10,
                                         double tol = 1e-6);

struct IpOptions {
  double time_limit_seconds = 600.0;
  long max_branch_nodes = 1000000;
  int cuts_per_round = 10;
  /// Drop dominated entries before building the model.
  bool prune = true;
  double violation_tol = 1e-6;
  double integrality_tol = 1e-7;
};

/// Cutting-plane branch and bound. When a limit is hit the best incumbent is
/// returned with status TimeLimit or NodeLimit.
SearchResult ip_search(const ScoreTable& table, const IpOptions& opts = {});

/// Fills score and best_delta for a DAG whose parent sets are in the table.
SearchResult describe_dag(const ScoreTable& table, const Dag& dag);

}  // namespace mdm
