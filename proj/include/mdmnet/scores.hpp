#pragma once

// Local scores L(r, S): the best-over-discount log predictive likelihood of
// node r regressed on parent set S, tabulated for every candidate S.

#include "mdmnet/dag.hpp"
#include "mdmnet/dlm.hpp"
#include "mdmnet/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mdm {

/// Evenly spaced discount factors start, start + step, ..., end.
struct DeltaGrid {
  double start = 0.5;
  double end = 1.0;
  double step = 0.01;

  void validate() const;
  std::vector<double> values() const;
};

struct ScoreConfig {
  DeltaGrid grid;
  double n0 = 0.001;
  double d0 = 0.001;
  double cstar_scale = 3.0;
  /// Largest parent-set size scored; nullopt means n - 1.
  std::optional<int> max_parents;
  bool prune = false;
  /// Largest n scored without a max_parents cap.
  int max_nodes_uncapped = 14;
  /// 0 selects worker_count().
  int threads = 0;

  /// Prior shared by every candidate parent set of dimension p (zero mean,
  /// cstar_scale * I, n0, d0).
  NodePrior prior(int p) const;
};

struct ScoreEntry {
  ParentSet parents;
  double score = 0.0;
  double delta = 1.0;
};

struct LocalScore {
  double score = 0.0;
  double delta = 1.0;
};

/// Per-node lists of (parent set, score, best discount). Entries of each
/// node are kept sorted by (set size, bitmask); the empty set is always
/// present.
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(int n) : entries_(n) {}

  int node_count() const { return static_cast<int>(entries_.size()); }
  const std::vector<ScoreEntry>& entries(int node) const { return entries_.at(node); }
  std::size_t total_entries() const;

  /// Adds an entry; throws InvalidArgument on duplicates, self parents or
  /// out-of-range indices.
  void add(int node, const ScoreEntry& entry);
  const ScoreEntry* find(int node, ParentSet parents) const;
  /// Restores the canonical entry order after a sequence of add() calls.
  void sort();
  /// Checks the table invariants (finite scores, empty set present, ...).
  void validate() const;

  friend bool operator==(const ScoreTable& a, const ScoreTable& b);

 private:
  std::vector<std::vector<ScoreEntry>> entries_;
};

/// Grid maximiser of `lpl`; ties go to the larger discount. Discounts whose
/// evaluation throws NumericalError are skipped; if all fail it rethrows.
LocalScore argmax_over_grid(const std::vector<double>& grid, const std::function<double(double)>& lpl);

/// Max over the discount grid of the node's log predictive likelihood; ties
/// go to the larger discount.
LocalScore node_best_score(const TimeSeriesMatrix& data, int node, ParentSet parents, const ScoreConfig& cfg);

/// Scores every (node, parent set) pair with |S| <= max_parents. Optional
/// per-node wall time in seconds.
ScoreTable compute_score_table(const TimeSeriesMatrix& data, const ScoreConfig& cfg,
                               std::vector<double>* node_seconds = nullptr);

/// Drops (r, S) whenever some proper subset S' of S in the table scores at
/// least as well. The optimal DAG score is unchanged.
ScoreTable prune_score_table(const ScoreTable& table);

/// Sum of the table entries selected by the DAG, accumulated in node order.
/// Throws InvalidArgument when some parent set is absent from the table.
double dag_score(const ScoreTable& table, const Dag& dag);

/// Plain-text score file: `n`, then per node a header `r k` followed by k
/// lines `score |S| parents... delta=<value>` (1-based node labels).
void write_scores(std::ostream& out, const ScoreTable& table);
ScoreTable read_scores(std::istream& in);

}  // namespace mdm
