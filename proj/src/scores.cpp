#include "mdmnet/scores.hpp"

#include "mdmnet/error.hpp"
#include "mdmnet/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>

namespace mdm {

namespace {

bool entry_order(const ScoreEntry& a, const ScoreEntry& b) {
  if (a.parents.size() != b.parents.size()) return a.parents.size() < b.parents.size();
  return a.parents.bits() < b.parents.bits();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

void DeltaGrid::validate() const {
  if (!(start > 0.0 && start <= 1.0) || !(end > 0.0 && end <= 1.0))
    throw InvalidArgument("discount grid must lie within (0, 1]");
  if (start > end) throw InvalidArgument("discount grid start exceeds end");
  if (!(step > 0.0)) throw InvalidArgument("discount grid step must be positive");
}

std::vector<double> DeltaGrid::values() const {
  validate();
  const auto count = static_cast<long>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  // Snapped to 12 decimals so 0.5 + 35 * 0.01 is stored as 0.85.
  for (long i = 0; i < count; ++i)
    out.push_back(std::min(end, std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12));
  if (end - out.back() > 1e-9) out.push_back(end);
  return out;
}

NodePrior ScoreConfig::prior(int p) const { return NodePrior::weakly_informative(p, cstar_scale, n0, d0); }

std::size_t ScoreTable::total_entries() const {
  std::size_t k = 0;
  for (const auto& e : entries_) k += e.size();
  return k;
}

void ScoreTable::add(int node, const ScoreEntry& entry) {
  const int n = node_count();
  if (node < 0 || node >= n) throw InvalidArgument("node index out of range");
  if (entry.parents.contains(node)) throw InvalidArgument("parent set contains its own node");
  if (n < kMaxNodes && (entry.parents.bits() >> n) != 0) throw InvalidArgument("parent index out of range");
  if (find(node, entry.parents) != nullptr) throw InvalidArgument("duplicate parent set");
  entries_[node].push_back(entry);
}

const ScoreEntry* ScoreTable::find(int node, ParentSet parents) const {
  for (const auto& e : entries_.at(node))
    if (e.parents == parents) return &e;
  return nullptr;
}

void ScoreTable::sort() {
  for (auto& list : entries_) std::sort(list.begin(), list.end(), entry_order);
}

void ScoreTable::validate() const {
  for (int r = 0; r < node_count(); ++r) {
    if (find(r, ParentSet{}) == nullptr)
      throw InvalidArgument("node " + std::to_string(r + 1) + " lacks the empty parent set");
    for (const auto& e : entries_[r]) {
      if (!std::isfinite(e.score)) throw InvalidArgument("non-finite score for node " + std::to_string(r + 1));
      if (e.parents.contains(r)) throw InvalidArgument("parent set contains its own node");
    }
  }
}

bool operator==(const ScoreTable& a, const ScoreTable& b) {
  if (a.node_count() != b.node_count()) return false;
  for (int r = 0; r < a.node_count(); ++r) {
    const auto& x = a.entries(r);
    const auto& y = b.entries(r);
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].parents != y[i].parents || x[i].score != y[i].score || x[i].delta != y[i].delta) return false;
  }
  return true;
}

LocalScore argmax_over_grid(const std::vector<double>& grid, const std::function<double(double)>& lpl) {
  if (grid.empty()) throw InvalidArgument("empty discount grid");
  LocalScore best{-std::numeric_limits<double>::infinity(), grid.front()};
  bool any = false;
  std::string failure;
  for (double delta : grid) {
    double v;
    try {
      v = lpl(delta);
    } catch (const NumericalError& e) {
      // Unidentified directions can blow up under strong discounting.
      failure = e.what();
      continue;
    }
    if (!any || v >= best.score) best = {v, delta};
    any = true;
  }
  if (!any) throw NumericalError("every discount on the grid failed: " + failure);
  return best;
}

LocalScore node_best_score(const TimeSeriesMatrix& data, int node, ParentSet parents, const ScoreConfig& cfg) {
  if (!data.allFinite()) throw InvalidArgument("data contain missing or non-finite values");
  const RegressionDesign design = RegressionDesign::from_parents(data, node, parents);
  const Eigen::VectorXd y = data.col(node);
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
  const NodePrior prior = cfg.prior(design.dimension());
  return argmax_over_grid(cfg.grid.values(),
                          [&](double delta) { return log_predictive_likelihood(ys, design, delta, prior); });
}

ScoreTable compute_score_table(const TimeSeriesMatrix& data, const ScoreConfig& cfg, std::vector<double>* node_seconds) {
  const int n = static_cast<int>(data.cols());
  const int T = static_cast<int>(data.rows());
  if (n < 1) throw InvalidArgument("data have no columns");
  if (!data.allFinite()) throw InvalidArgument("data contain missing or non-finite values");
  cfg.grid.validate();
  if (!cfg.max_parents && n > cfg.max_nodes_uncapped)
    throw ResourceError("n = " + std::to_string(n) + " exceeds the uncapped limit of " +
                        std::to_string(cfg.max_nodes_uncapped) + " nodes; set max_parents to bound the search space");
  if (n > 20) throw ResourceError("score tables support at most 20 nodes");
  const int cap = std::min(n - 1, cfg.max_parents.value_or(n - 1));
  if (cap < 0) throw InvalidArgument("max_parents must be non-negative");
  if (T < cap + 3)
    throw InvalidArgument("series length " + std::to_string(T) + " too short for parent sets of size " +
                          std::to_string(cap));

  struct Task {
    int node;
    ParentSet parents;
  };
  std::vector<Task> tasks;
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1u);
  for (int r = 0; r < n; ++r) {
    const std::uint32_t others = full & ~(1u << r);
    // Enumerate subsets of `others` (including the empty set).
    std::uint32_t s = 0;
    while (true) {
      if (std::popcount(s) <= cap) tasks.push_back({r, ParentSet(s)});
      if (s == others) break;
      s = (s - others) & others;
    }
  }

  std::vector<LocalScore> results(tasks.size());
  std::vector<double> task_seconds(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        results[i] = node_best_score(data, tasks[i].node, tasks[i].parents, cfg);
        task_seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      },
      cfg.threads);

  ScoreTable table(n);
  if (node_seconds) node_seconds->assign(n, 0.0);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    table.add(tasks[i].node, {tasks[i].parents, results[i].score, results[i].delta});
    if (node_seconds) (*node_seconds)[tasks[i].node] += task_seconds[i];
  }
  table.sort();
  return cfg.prune ? prune_score_table(table) : table;
}

ScoreTable prune_score_table(const ScoreTable& table) {
  const int n = table.node_count();
  if (n > 20) throw ResourceError("pruning supports at most 20 nodes");
  const std::size_t space = std::size_t{1} << n;
  ScoreTable out(n);
  std::vector<double> best_within(space);
  std::vector<double> own(space);
  for (int r = 0; r < n; ++r) {
    std::fill(own.begin(), own.end(), -std::numeric_limits<double>::infinity());
    for (const auto& e : table.entries(r)) own[e.parents.bits()] = e.score;
    // best_within[U] = best score of any table entry that is a subset of U.
    best_within = own;
    for (int v = 0; v < n; ++v)
      for (std::size_t u = 0; u < space; ++u)
        if ((u >> v) & 1u) best_within[u] = std::max(best_within[u], best_within[u & ~(std::size_t{1} << v)]);
    for (const auto& e : table.entries(r)) {
      bool dominated = false;
      for (int v : e.parents.members()) {
        if (best_within[e.parents.without(v).bits()] >= e.score) {
          dominated = true;
          break;
        }
      }
      if (!dominated) out.add(r, e);
    }
  }
  out.sort();
  return out;
}

double dag_score(const ScoreTable& table, const Dag& dag) {
  if (dag.size() != table.node_count()) throw InvalidArgument("DAG and score table differ in node count");
  double total = 0.0;
  for (int r = 0; r < dag.size(); ++r) {
    const ScoreEntry* e = table.find(r, dag.parents(r));
    if (e == nullptr) throw InvalidArgument("parent set of node " + std::to_string(r + 1) + " is not in the score table");
    total += e->score;
  }
  return total;
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  out << table.node_count() << '\n';
  for (int r = 0; r < table.node_count(); ++r) {
    const auto& list = table.entries(r);
    out << (r + 1) << ' ' << list.size() << '\n';
    for (const auto& e : list) {
      out << format_double(e.score) << ' ' << e.parents.size();
      for (int v : e.parents.members()) out << ' ' << (v + 1);
      out << " delta=" << format_double(e.delta) << '\n';
    }
  }
}

ScoreTable read_scores(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::vector<std::string_view>& tokens) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      tokens = split_ws(line);
      if (!tokens.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> tok;
  if (!next_line(tok)) throw ParseError("empty score file", std::max(lineno, 1));
  int n = 0;
  if (tok.size() != 1 || !parse_number(tok[0], n) || n < 1 || n > kMaxNodes)
    throw ParseError("expected a node count", lineno);

  ScoreTable table(n);
  std::vector<char> seen(n, 0);
  for (int block = 0; block < n; ++block) {
    if (!next_line(tok)) throw ParseError("missing node block", lineno + 1);
    int r = 0;
    long k = 0;
    if (tok.size() != 2 || !parse_number(tok[0], r) || !parse_number(tok[1], k) || k < 0)
      throw ParseError("expected node header `r k`", lineno);
    if (r < 1 || r > n) throw ParseError("node label out of range", lineno);
    if (seen[r - 1]) throw ParseError("node listed twice", lineno);
    seen[r - 1] = 1;
    for (long i = 0; i < k; ++i) {
      if (!next_line(tok)) throw ParseError("unexpected end of file", lineno + 1);
      ScoreEntry e;
      int size = 0;
      if (tok.size() < 2 || !parse_number(tok[0], e.score) || !parse_number(tok[1], size) || size < 0)
        throw ParseError("expected `score |S| parents...`", lineno);
      std::size_t expected = 2 + static_cast<std::size_t>(size);
      bool has_delta = tok.size() == expected + 1;
      if (tok.size() != expected && !has_delta) throw ParseError("parent count does not match entries", lineno);
      for (int j = 0; j < size; ++j) {
        int v = 0;
        if (!parse_number(tok[2 + j], v)) throw ParseError("bad parent index", lineno);
        if (v < 1 || v > n || v == r) throw ParseError("parent index out of range", lineno);
        if (e.parents.contains(v - 1)) throw ParseError("repeated parent", lineno);
        e.parents = e.parents.with(v - 1);
      }
      if (has_delta) {
        std::string_view d = tok.back();
        if (d.substr(0, 6) != "delta=" || !parse_number(d.substr(6), e.delta) || !(e.delta > 0.0 && e.delta <= 1.0))
          throw ParseError("bad delta token", lineno);
      }
      if (!std::isfinite(e.score)) throw ParseError("non-finite score", lineno);
      if (table.find(r - 1, e.parents) != nullptr) throw ParseError("duplicate parent set", lineno);
      table.add(r - 1, e);
    }
  }
  if (next_line(tok)) throw ParseError("trailing content after the last node block", lineno);
  for (int r = 0; r < n; ++r)
    if (table.find(r, ParentSet{}) == nullptr)
      throw ParseError("node " + std::to_string(r + 1) + " lacks the empty parent set", lineno);
  table.sort();
  return table;
}

}  // namespace mdm
