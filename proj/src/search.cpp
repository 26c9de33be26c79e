#include "mdmnet/search.hpp"

#include "mdmnet/error.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>

namespace mdm {

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Optimal: return "optimal";
    case SearchStatus::TimeLimit: return "time limit";
    case SearchStatus::NodeLimit: return "node limit";
  }
  return "unknown";
}

SearchResult describe_dag(const ScoreTable& table, const Dag& dag) {
  SearchResult out;
  out.dag = dag;
  out.score = dag_score(table, dag);
  out.upper_bound = out.score;
  out.best_delta.resize(dag.size());
  for (int r = 0; r < dag.size(); ++r) out.best_delta[r] = table.find(r, dag.parents(r))->delta;
  return out;
}

namespace {

// Drops bit r from a mask over n nodes, giving an index over the other n - 1.
inline std::uint32_t squeeze(std::uint32_t u, int r) {
  const std::uint32_t low = (1u << r) - 1u;
  return (u & low) | ((u >> (r + 1)) << r);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SearchResult dp_exact_search(const ScoreTable& table) {
  table.validate();
  const int n = table.node_count();
  if (n > 20) throw ResourceError("exact search supports at most 20 nodes, got " + std::to_string(n));
  const auto start = std::chrono::steady_clock::now();
  const std::size_t half = std::size_t{1} << (n - 1);

  // best[r][U]: index of the best entry of node r with parents inside U.
  std::vector<std::vector<int>> best(n, std::vector<int>(half, -1));
  for (int r = 0; r < n; ++r) {
    const auto& entries = table.entries(r);
    auto& b = best[r];
    for (std::size_t k = 0; k < entries.size(); ++k) b[squeeze(entries[k].parents.bits(), r)] = static_cast<int>(k);
    auto better = [&](int a, int c) {
      if (c < 0) return false;
      if (a < 0) return true;
      if (entries[c].score != entries[a].score) return entries[c].score > entries[a].score;
      return entries[c].parents.bits() < entries[a].parents.bits();
    };
    for (int v = 0; v + 1 < n; ++v)
      for (std::size_t u = 0; u < half; ++u)
        if ((u >> v) & 1u) {
          const int c = b[u & ~(std::size_t{1} << v)];
          if (better(b[u], c)) b[u] = c;
        }
  }

  const std::size_t full = std::size_t{1} << n;
  std::vector<double> value(full, -std::numeric_limits<double>::infinity());
  std::vector<signed char> sink(full, -1);
  value[0] = 0.0;
  for (std::size_t w = 1; w < full; ++w) {
    for (int s = 0; s < n; ++s) {
      if (!((w >> s) & 1u)) continue;
      const std::uint32_t rest = static_cast<std::uint32_t>(w & ~(std::size_t{1} << s));
      const double cand = value[rest] + table.entries(s)[best[s][squeeze(rest, s)]].score;
      if (cand > value[w]) {
        value[w] = cand;
        sink[w] = static_cast<signed char>(s);
      }
    }
  }

  Dag dag(n);
  std::uint32_t w = static_cast<std::uint32_t>(full - 1);
  while (w != 0) {
    const int s = sink[w];
    w &= ~(1u << s);
    dag.set_parents(s, table.entries(s)[best[s][squeeze(w, s)]].parents);
  }
  SearchResult out = describe_dag(table, dag);
  out.telemetry.seconds = seconds_since(start);
  return out;
}

IpModel IpModel::from_table(const ScoreTable& table) {
  table.validate();
  IpModel m;
  m.n = table.node_count();
  m.by_node.resize(m.n);
  for (int r = 0; r < m.n; ++r)
    for (const auto& e : table.entries(r)) {
      m.by_node[r].push_back(static_cast<int>(m.vars.size()));
      m.vars.push_back({r, e.parents, e.score});
    }
  return m;
}

bool IpModel::has_cluster(ParentSet c) const { return std::find(clusters.begin(), clusters.end(), c) != clusters.end(); }

LpSolution solve_lp_relaxation(const IpModel& model, const std::vector<char>* disabled) {
  LpProblem lp;
  for (int r = 0; r < model.n; ++r) lp.add_row(RowSense::Equal, 1.0);
  for (std::size_t k = 0; k < model.clusters.size(); ++k) lp.add_row(RowSense::GreaterEqual, 1.0);
  std::vector<int> column_of;
  for (std::size_t i = 0; i < model.vars.size(); ++i) {
    if (disabled && (*disabled)[i]) continue;
    const IpVariable& v = model.vars[i];
    std::vector<std::pair<int, double>> col{{v.node, 1.0}};
    for (std::size_t k = 0; k < model.clusters.size(); ++k) {
      const ParentSet c = model.clusters[k];
      if (c.contains(v.node) && !v.parents.intersects(c)) col.emplace_back(model.n + static_cast<int>(k), 1.0);
    }
    lp.add_column(v.objective, std::move(col));
    column_of.push_back(static_cast<int>(i));
  }
  const LpResult res = solve_lp(lp);
  LpSolution sol;
  sol.status = res.status;
  sol.iterations = res.iterations;
  sol.values.assign(model.vars.size(), 0.0);
  if (res.status == LpStatus::Unbounded) throw NumericalError("relaxation reported unbounded");
  if (res.status == LpStatus::IterationLimit) throw NumericalError("relaxation hit the simplex iteration limit");
  if (res.status != LpStatus::Optimal) return sol;
  for (std::size_t j = 0; j < column_of.size(); ++j) sol.values[column_of[j]] = std::min(res.x[j], 1.0);
  sol.objective = res.objective;
  return sol;
}

double cluster_activity(const IpModel& model, const std::vector<double>& values, ParentSet cluster) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.vars.size(); ++i) {
    const IpVariable& v = model.vars[i];
    if (cluster.contains(v.node) && !v.parents.intersects(cluster)) s += values[i];
  }
  return s;
}

std::vector<ParentSet> separate_clusters(const IpModel& model, const std::vector<double>& values, int max_cuts,
                                         double tol) {
  if (model.n > 20) throw ResourceError("cluster separation supports at most 20 nodes");
  struct Support {
    std::uint32_t node_bit;
    std::uint32_t parents;
    double x;
  };
  std::vector<Support> support;
  for (std::size_t i = 0; i < model.vars.size(); ++i)
    if (values[i] > 1e-12) support.push_back({1u << model.vars[i].node, model.vars[i].parents.bits(), values[i]});

  std::vector<std::pair<double, std::uint32_t>> violated;
  const std::uint32_t full = model.n == 32 ? ~0u : (1u << model.n);
  for (std::uint32_t c = 3; c < full; ++c) {
    if (std::popcount(c) < 2) continue;
    double act = 0.0;
    for (const auto& s : support)
      if ((s.node_bit & c) && !(s.parents & c)) act += s.x;
    if (act < 1.0 - tol) violated.emplace_back(act - 1.0, c);
  }
  std::sort(violated.begin(), violated.end());
  if (static_cast<int>(violated.size()) > max_cuts) violated.resize(max_cuts);
  std::vector<ParentSet> out;
  for (const auto& v : violated) out.emplace_back(v.second);
  return out;
}

namespace {

struct BranchNode {
  std::vector<char> disabled;
  double bound;
  int depth;
  long id;
};

struct NodeOrder {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

// Places nodes one at a time, each taking its best enabled entry whose parents
// are already placed. Nodes carrying the most LP mass on such entries go first.
std::optional<Dag> greedy_dag(const IpModel& model, const std::vector<char>& disabled,
                              const std::vector<double>& values) {
  Dag dag(model.n);
  std::uint32_t placed = 0;
  for (int step = 0; step < model.n; ++step) {
    int pick = -1, pick_var = -1;
    double pick_mass = -1.0;
    for (int r = 0; r < model.n; ++r) {
      if ((placed >> r) & 1u) continue;
      double mass = 0.0;
      int best = -1;
      for (int i : model.by_node[r]) {
        if (disabled[i] || (model.vars[i].parents.bits() & ~placed)) continue;
        mass += values[i];
        if (best < 0 || model.vars[i].objective > model.vars[best].objective) best = i;
      }
      if (best >= 0 && mass > pick_mass) {
        pick = r;
        pick_var = best;
        pick_mass = mass;
      }
    }
    if (pick < 0) return std::nullopt;
    dag.set_parents(pick, model.vars[pick_var].parents);
    placed |= 1u << pick;
  }
  return dag;
}

}  // namespace

SearchResult ip_search(const ScoreTable& input, const IpOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  input.validate();
  const ScoreTable table = opts.prune ? prune_score_table(input) : input;
  IpModel model = IpModel::from_table(table);
  SearchTelemetry tel;

  std::optional<Dag> incumbent;
  double incumbent_score = -std::numeric_limits<double>::infinity();
  auto offer = [&](const Dag& d) {
    if (!d.is_acyclic()) return;
    const double s = dag_score(table, d);
    if (s > incumbent_score) {
      incumbent_score = s;
      incumbent = d;
    }
  };
  offer(Dag(model.n));
  auto tol = [&] { return 1e-9 * std::max(1.0, std::abs(incumbent_score)); };

  std::priority_queue<BranchNode, std::vector<BranchNode>, NodeOrder> open;
  long next_id = 0;
  open.push({std::vector<char>(model.vars.size(), 0), std::numeric_limits<double>::infinity(), 0, next_id++});
  SearchStatus status = SearchStatus::Optimal;
  double open_bound = -std::numeric_limits<double>::infinity();

  while (!open.empty()) {
    BranchNode node = open.top();
    if (std::isfinite(incumbent_score) && node.bound <= incumbent_score + tol()) break;
    if (seconds_since(start) > opts.time_limit_seconds) {
      status = SearchStatus::TimeLimit;
      open_bound = node.bound;
      break;
    }
    if (tel.branch_nodes >= opts.max_branch_nodes) {
      status = SearchStatus::NodeLimit;
      open_bound = node.bound;
      break;
    }
    open.pop();
    ++tel.branch_nodes;
    tel.max_depth = std::max(tel.max_depth, node.depth);
    const bool root = node.id == 0;

    LpSolution sol;
    bool pruned = false;
    while (true) {
      sol = solve_lp_relaxation(model, &node.disabled);
      ++tel.lp_solves;
      tel.simplex_iterations += sol.iterations;
      if (sol.status != LpStatus::Optimal) {
        if (root) throw NumericalError("root relaxation is infeasible");
        pruned = true;
        break;
      }
      if (root) tel.root_bounds.push_back(sol.objective);
      if (std::isfinite(incumbent_score) && sol.objective <= incumbent_score + tol()) {
        pruned = true;
        break;
      }
      std::vector<ParentSet> cuts = separate_clusters(model, sol.values, opts.cuts_per_round, opts.violation_tol);
      std::erase_if(cuts, [&](ParentSet c) { return model.has_cluster(c); });
      if (cuts.empty()) break;
      ++tel.cut_rounds;
      tel.cuts_added += static_cast<long>(cuts.size());
      model.clusters.insert(model.clusters.end(), cuts.begin(), cuts.end());
      if (seconds_since(start) > opts.time_limit_seconds) break;
    }
    if (pruned) continue;

    if (auto g = greedy_dag(model, node.disabled, sol.values)) offer(*g);

    int frac = -1;
    double frac_gap = opts.integrality_tol;
    for (std::size_t i = 0; i < sol.values.size(); ++i) {
      const double gap = std::min(sol.values[i], 1.0 - sol.values[i]);
      if (gap > frac_gap) {
        frac_gap = gap;
        frac = static_cast<int>(i);
      }
    }
    if (frac < 0) {
      Dag d(model.n);
      for (std::size_t i = 0; i < sol.values.size(); ++i)
        if (sol.values[i] > 0.5) d.set_parents(model.vars[i].node, model.vars[i].parents);
      offer(d);
      continue;
    }
    if (std::isfinite(incumbent_score) && sol.objective <= incumbent_score + tol()) continue;

    BranchNode zero{node.disabled, sol.objective, node.depth + 1, next_id++};
    zero.disabled[frac] = 1;
    BranchNode one{node.disabled, sol.objective, node.depth + 1, next_id++};
    for (int i : model.by_node[model.vars[frac].node])
      if (i != frac) one.disabled[i] = 1;
    open.push(std::move(zero));
    open.push(std::move(one));
  }

  if (!incumbent) throw NumericalError("search ended without a feasible DAG");
  SearchResult out = describe_dag(table, *incumbent);
  out.status = status;
  out.upper_bound = status == SearchStatus::Optimal ? out.score : std::max(out.score, open_bound);
  tel.seconds = seconds_since(start);
  out.telemetry = std::move(tel);
  return out;
}

}  // namespace mdm
