#include "doctest.h"

#include "mdmnet/error.hpp"
#include "mdmnet/lp.hpp"
#include "mdmnet/search.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace mdm;
using oracle::brute_force;
using oracle::random_table;

namespace {

Dag random_dag(std::mt19937_64& rng, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution edge(0.4);
  Dag d(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) d.set_parents(order[b], d.parents(order[b]).with(order[a]));
  return d;
}

std::vector<double> integral_point(const IpModel& m, const Dag& d) {
  std::vector<double> x(m.vars.size(), 0.0);
  for (std::size_t i = 0; i < m.vars.size(); ++i)
    if (d.parents(m.vars[i].node) == m.vars[i].parents) x[i] = 1.0;
  return x;
}

}  // namespace

TEST_CASE("simplex on small textbook problems") {
  SUBCASE("bounded optimum") {
    // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
    LpProblem lp;
    lp.add_row(RowSense::LessEqual, 4);
    lp.add_row(RowSense::LessEqual, 6);
    lp.add_row(RowSense::LessEqual, 3);
    lp.add_column(3, {{0, 1}, {1, 1}, {2, 1}});
    lp.add_column(2, {{0, 1}, {1, 3}});
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(11.0));
    CHECK(r.x[0] == doctest::Approx(3.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
  }
  SUBCASE("equality and >= rows need phase one") {
    // max -x - y, x + y = 2, x - y >= 1
    LpProblem lp;
    lp.add_row(RowSense::Equal, 2);
    lp.add_row(RowSense::GreaterEqual, 1);
    lp.add_column(-1, {{0, 1}, {1, 1}});
    lp.add_column(-2, {{0, 1}, {1, -1}});
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-2.0));
    CHECK(r.x[0] == doctest::Approx(2.0));
  }
  SUBCASE("infeasible") {
    LpProblem lp;
    lp.add_row(RowSense::LessEqual, 1);
    lp.add_row(RowSense::GreaterEqual, 2);
    lp.add_column(1, {{0, 1}, {1, 1}});
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  }
  SUBCASE("unbounded") {
    LpProblem lp;
    lp.add_row(RowSense::GreaterEqual, 1);
    lp.add_column(1, {{0, 1}});
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  }
  SUBCASE("negative right-hand side") {
    // max x, -x >= -5
    LpProblem lp;
    lp.add_row(RowSense::GreaterEqual, -5);
    lp.add_column(1, {{0, -1}});
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(5.0));
  }
  SUBCASE("bad input") {
    LpProblem lp;
    lp.add_row(RowSense::Equal, 1);
    lp.add_column(1, {{3, 1}});
    CHECK_THROWS_AS(solve_lp(lp), InvalidArgument);
  }
}

TEST_CASE("simplex agrees with vertex enumeration on random 2-variable programs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    // max c'x over a box plus two random cuts, all <= rows.
    LpProblem lp;
    std::vector<std::array<double, 3>> rows{{1, 0, 2}, {0, 1, 2}};
    for (int i = 0; i < 2; ++i) rows.push_back({u(rng), u(rng), 1.0 + u(rng) * 0.5});
    for (const auto& r : rows) lp.add_row(RowSense::LessEqual, r[2]);
    const double c0 = u(rng), c1 = u(rng);
    lp.add_column(c0, {{0, 1}, {2, rows[2][0]}, {3, rows[3][0]}});
    lp.add_column(c1, {{1, 1}, {2, rows[2][1]}, {3, rows[3][1]}});
    const LpResult res = solve_lp(lp);
    REQUIRE(res.status == LpStatus::Optimal);

    std::vector<std::array<double, 3>> all = rows;
    all.push_back({-1, 0, 0});
    all.push_back({0, -1, 0});
    double best = -1e300;
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a + 1; b < all.size(); ++b) {
        const double det = all[a][0] * all[b][1] - all[a][1] * all[b][0];
        if (std::abs(det) < 1e-12) continue;
        const double x = (all[a][2] * all[b][1] - all[a][1] * all[b][2]) / det;
        const double y = (all[a][0] * all[b][2] - all[a][2] * all[b][0]) / det;
        bool ok = true;
        for (const auto& r : all) ok = ok && r[0] * x + r[1] * y <= r[2] + 1e-9;
        if (ok) best = std::max(best, c0 * x + c1 * y);
      }
    CHECK(res.objective == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("dp search trivial cases") {
  ScoreTable one(1);
  one.add(0, {ParentSet{}, -4.5, 0.9});
  const SearchResult r = dp_exact_search(one);
  CHECK(r.score == -4.5);
  CHECK(r.dag.edge_count() == 0);
  CHECK(r.best_delta[0] == 0.9);

  ScoreTable empty_best(3);
  for (int node = 0; node < 3; ++node) {
    empty_best.add(node, {ParentSet{}, -1.0, 1.0});
    for (int p = 0; p < 3; ++p)
      if (p != node) empty_best.add(node, {ParentSet::of({p}), -2.0, 1.0});
  }
  empty_best.sort();
  CHECK(dp_exact_search(empty_best).dag.edge_count() == 0);
  CHECK(ip_search(empty_best).dag.edge_count() == 0);

  CHECK_THROWS_AS(dp_exact_search(ScoreTable(21)), Error);
}

TEST_CASE("dp and ip match brute force for n <= 5") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k < (n < 5 ? 15 : 3); ++k) {
      const ScoreTable t = random_table(rng, n, n == 5 ? 0.5 : 1.0);
      const double bf = brute_force(t);
      const SearchResult dp = dp_exact_search(t);
      const SearchResult ip = ip_search(t);
      CHECK(dp.dag.is_acyclic());
      CHECK(ip.dag.is_acyclic());
      CHECK(dp.score == doctest::Approx(bf).epsilon(1e-12));
      CHECK(ip.score == doctest::Approx(bf).epsilon(1e-12));
      CHECK(ip.proven_optimal());
    }
}

TEST_CASE("ip search equals the dp oracle on random tables") {
  std::mt19937_64 rng(2024);
  int equal_dag = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 4 + k % 5;
    const ScoreTable t = random_table(rng, n, 0.7);
    const SearchResult dp = dp_exact_search(t);
    const SearchResult ip = ip_search(t);
    REQUIRE(ip.proven_optimal());
    CHECK(ip.dag.is_acyclic());
    CHECK(ip.score == dp.score);
    equal_dag += ip.dag == dp.dag;
  }
  CHECK(equal_dag == 200);
}

TEST_CASE("pruned and unpruned tables give the same optimum") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const ScoreTable t = random_table(rng, 4 + k % 3);
    IpOptions raw;
    raw.prune = false;
    const SearchResult a = ip_search(t, raw);
    const SearchResult b = ip_search(t);
    CHECK(a.score == b.score);
    CHECK(dp_exact_search(prune_score_table(t)).score == dp_exact_search(t).score);
  }
}

TEST_CASE("cluster separation") {
  SUBCASE("two-cycle") {
    ScoreTable t(2);
    t.add(0, {ParentSet{}, -5, 1});
    t.add(0, {ParentSet::of({1}), -1, 1});
    t.add(1, {ParentSet{}, -5, 1});
    t.add(1, {ParentSet::of({0}), -1, 1});
    t.sort();
    const IpModel m = IpModel::from_table(t);
    const std::vector<double> x{0, 1, 0, 1};
    CHECK(cluster_activity(m, x, ParentSet::of({0, 1})) == 0.0);
    const auto cuts = separate_clusters(m, x);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0] == ParentSet::of({0, 1}));

    // The relaxation without the cut picks the cycle; with it the bound drops.
    IpModel cut = m;
    const double before = solve_lp_relaxation(cut).objective;
    cut.clusters.push_back(cuts[0]);
    const double after = solve_lp_relaxation(cut).objective;
    CHECK(before == doctest::Approx(-2.0));
    CHECK(after == doctest::Approx(-6.0));
    CHECK(ip_search(t).score == -6.0);
  }
  SUBCASE("three-cycle") {
    std::mt19937_64 rng(1);
    const ScoreTable t = random_table(rng, 4);
    const IpModel m = IpModel::from_table(t);
    Dag cyc(4);
    cyc.set_parents(1, ParentSet::of({0}));
    cyc.set_parents(2, ParentSet::of({1}));
    cyc.set_parents(0, ParentSet::of({2}));
    const auto cuts = separate_clusters(m, integral_point(m, cyc), 100);
    REQUIRE_FALSE(cuts.empty());
    bool inside = false;
    for (ParentSet c : cuts) inside = inside || (c.size() >= 2 && c.subset_of(ParentSet::of({0, 1, 2})));
    CHECK(inside);
    // The exhaustive answer: exactly the clusters with zero activity.
    for (std::uint32_t c = 0; c < 16; ++c) {
      const ParentSet cs(c);
      if (cs.size() < 2) continue;
      const bool viol = cluster_activity(m, integral_point(m, cyc), cs) < 1.0 - 1e-6;
      CHECK(viol == (std::find(cuts.begin(), cuts.end(), cs) != cuts.end()));
    }
  }
  SUBCASE("acyclic integral points satisfy every cluster") {
    std::mt19937_64 rng(4);
    const ScoreTable t = random_table(rng, 6);
    const IpModel m = IpModel::from_table(t);
    for (int k = 0; k < 50; ++k) CHECK(separate_clusters(m, integral_point(m, random_dag(rng, 6))).empty());
  }
}

TEST_CASE("cuts are valid and the root bound is monotone") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 20; ++k) {
    const int n = 5 + k % 3;
    const ScoreTable t = random_table(rng, n);
    IpModel m = IpModel::from_table(t);
    std::vector<double> bounds;
    for (int round = 0; round < 30; ++round) {
      const LpSolution sol = solve_lp_relaxation(m);
      REQUIRE(sol.status == LpStatus::Optimal);
      bounds.push_back(sol.objective);
      const auto cuts = separate_clusters(m, sol.values);
      if (cuts.empty()) break;
      m.clusters.insert(m.clusters.end(), cuts.begin(), cuts.end());
    }
    for (std::size_t i = 1; i < bounds.size(); ++i) CHECK(bounds[i] <= bounds[i - 1] + 1e-9);
    CHECK(bounds.back() >= dp_exact_search(t).score - 1e-9);
    for (int s = 0; s < 30; ++s) {
      const Dag d = random_dag(rng, n);
      const auto x = integral_point(m, d);
      for (ParentSet c : m.clusters) CHECK(cluster_activity(m, x, c) >= 1.0);
    }

    const SearchResult ip = ip_search(t);
    for (std::size_t i = 1; i < ip.telemetry.root_bounds.size(); ++i)
      CHECK(ip.telemetry.root_bounds[i] <= ip.telemetry.root_bounds[i - 1] + 1e-9);
  }
}

TEST_CASE("relaxation with fixings") {
  std::mt19937_64 rng(5);
  const ScoreTable t = random_table(rng, 3);
  const IpModel m = IpModel::from_table(t);
  std::vector<char> off(m.vars.size(), 0);
  for (int i : m.by_node[0]) off[i] = 1;
  CHECK(solve_lp_relaxation(m, &off).status == LpStatus::Infeasible);

  // Fixing node 0 to its empty set leaves only that entry free in its row.
  std::fill(off.begin(), off.end(), 0);
  for (int i : m.by_node[0])
    if (!m.vars[i].parents.empty()) off[i] = 1;
  const LpSolution s = solve_lp_relaxation(m, &off);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.values[m.by_node[0][0]] == doctest::Approx(1.0));
}

TEST_CASE("limits return a flagged incumbent") {
  std::mt19937_64 rng(6);
  const ScoreTable t = random_table(rng, 8);
  IpOptions opts;
  opts.max_branch_nodes = 0;
  const SearchResult r = ip_search(t, opts);
  CHECK(r.status == SearchStatus::NodeLimit);
  CHECK_FALSE(r.proven_optimal());
  CHECK(r.dag.is_acyclic());
  CHECK(r.upper_bound >= r.score);

  opts.max_branch_nodes = 1000000;
  opts.time_limit_seconds = 0.0;
  CHECK(ip_search(t, opts).status == SearchStatus::TimeLimit);
}
