#include "mdmnet/dag.hpp"

#include "mdmnet/error.hpp"

#include <sstream>

namespace mdm {

Dag::Dag(int n) {
  if (n < 0 || n > kMaxNodes) throw InvalidArgument("node count out of range: " + std::to_string(n));
  parents_.assign(n, ParentSet{});
}

Dag::Dag(std::vector<ParentSet> parents) : parents_(std::move(parents)) {
  if (size() > kMaxNodes) throw InvalidArgument("too many nodes");
  for (int r = 0; r < size(); ++r) {
    if (parents_[r].contains(r)) throw InvalidArgument("node " + std::to_string(r + 1) + " is its own parent");
    if (size() < kMaxNodes && (parents_[r].bits() >> size()) != 0)
      throw InvalidArgument("parent index out of range for node " + std::to_string(r + 1));
  }
}

Dag Dag::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<ParentSet> parents(n);
  for (auto [from, to] : edges) {
    if (from < 0 || from >= n || to < 0 || to >= n) throw InvalidArgument("edge endpoint out of range");
    parents[to] = parents[to].with(from);
  }
  return Dag(std::move(parents));
}

void Dag::set_parents(int node, ParentSet s) {
  if (s.contains(node)) throw InvalidArgument("self loop");
  parents_.at(node) = s;
}

int Dag::edge_count() const {
  int k = 0;
  for (auto s : parents_) k += s.size();
  return k;
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int to = 0; to < size(); ++to)
    for (int from : parents_[to].members()) out.emplace_back(from, to);
  return out;
}

std::optional<std::vector<int>> Dag::topological_order() const {
  const int n = size();
  std::vector<int> indeg(n);
  for (int r = 0; r < n; ++r) indeg[r] = parents_[r].size();
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> ready;
  for (int r = n - 1; r >= 0; --r)
    if (indeg[r] == 0) ready.push_back(r);
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int w = n - 1; w >= 0; --w) {
      if (parents_[w].contains(v) && --indeg[w] == 0) ready.push_back(w);
    }
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

Dag Dag::reversed() const {
  std::vector<std::pair<int, int>> rev;
  for (auto [from, to] : edges()) rev.emplace_back(to, from);
  return from_edges(size(), rev);
}

Eigen::MatrixXi Dag::adjacency() const {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(size(), size());
  for (auto [from, to] : edges()) a(from, to) = 1;
  return a;
}

std::string to_edge_list(const Dag& dag) {
  std::ostringstream os;
  for (auto [from, to] : dag.edges()) os << (from + 1) << " -> " << (to + 1) << '\n';
  return os.str();
}

std::string to_dot(const Dag& dag, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (int r = 0; r < dag.size(); ++r) os << "  " << (r + 1) << ";\n";
  for (auto [from, to] : dag.edges()) os << "  " << (from + 1) << " -> " << (to + 1) << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace mdm
