#pragma once

#include "mdmnet/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mdm {

/// Directed graph given as one parent set per node. Acyclicity is checked by
/// is_acyclic(); constructors do not enforce it so that search code can
/// represent intermediate digraphs.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n);
  explicit Dag(std::vector<ParentSet> parents);

  /// Builds from 0-based (from, to) edges.
  static Dag from_edges(int n, const std::vector<std::pair<int, int>>& edges);

  int size() const { return static_cast<int>(parents_.size()); }
  ParentSet parents(int node) const { return parents_.at(node); }
  void set_parents(int node, ParentSet s);
  const std::vector<ParentSet>& parent_sets() const { return parents_; }

  bool has_edge(int from, int to) const { return parents_.at(to).contains(from); }
  int edge_count() const;
  /// (from, to) pairs, ordered by target then source.
  std::vector<std::pair<int, int>> edges() const;

  /// Kahn ordering; nullopt when the digraph has a cycle.
  std::optional<std::vector<int>> topological_order() const;
  bool is_acyclic() const { return topological_order().has_value(); }

  /// Every edge reversed.
  Dag reversed() const;
  /// n x n 0/1 adjacency (row = source, column = target).
  Eigen::MatrixXi adjacency() const;

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  std::vector<ParentSet> parents_;
};

/// `i -> j` lines with 1-based node labels.
std::string to_edge_list(const Dag& dag);
/// Graphviz digraph with nodes labelled 1..n.
std::string to_dot(const Dag& dag, const std::string& name = "mdm");

}  // namespace mdm
