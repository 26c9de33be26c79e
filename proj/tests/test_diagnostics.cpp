#include "doctest.h"

#include "mdmnet/diagnostics.hpp"
#include "mdmnet/error.hpp"
#include "mdmnet/synthgen.hpp"
#include "support/generators.hpp"

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <cmath>

using namespace mdm;

namespace {

ModelSpec chain3() { return ModelSpec::from_dag(Dag::from_edges(3, {{0, 1}, {1, 2}})); }

ModelSpec one_parent() {
  ModelSpec s;
  s.nodes.resize(2);
  s.nodes[1].parents = ParentSet::of({0});
  return s;
}

}  // namespace

TEST_CASE("global monitor identities") {
  const auto reps = gen_appendix_b(120, 0.01, 3);
  const TimeSeriesMatrix& data = reps.front().data;
  const ModelFit a = fit_model(data, chain3());
  const BayesFactorSeries same = global_monitor(a, a);
  CHECK(same.final_value == 0.0);

  ModelSpec other = chain3();
  other.nodes[2].parents = ParentSet{};
  const ModelFit b = fit_model(data, other);
  const BayesFactorSeries ab = global_monitor(a, b);
  const BayesFactorSeries ba = global_monitor(b, a);
  for (int t = 0; t < 120; ++t) CHECK(ab.per_step[t] == -ba.per_step[t]);
  CHECK(ab.cumulative.back() == ab.final_value);
  // Only node 3 differs, so only its terms enter.
  CHECK(ab.final_value == doctest::Approx(a.nodes[2].lpl - b.nodes[2].lpl).epsilon(1e-12));
  CHECK(ab.final_value == doctest::Approx(a.lpl() - b.lpl()).epsilon(1e-12));

  const ModelFit shorter = fit_model(data.topRows(100), chain3());
  CHECK_THROWS_AS(global_monitor(a, shorter), InvalidArgument);
}

TEST_CASE("parent-child monitor") {
  SUBCASE("matches the score-table difference") {
    const auto reps = gen_appendix_b(200, 0.01, 5);
    const TimeSeriesMatrix& d = reps.front().data;
    ModelSpec spec = chain3();
    spec.nodes[2].parents = ParentSet::of({0, 1});
    const BayesFactorSeries s = parent_child_monitor(d, spec, 2, 1);
    const double full = node_best_score(d, 2, ParentSet::of({0, 1}), ScoreConfig{}).score;
    const double reduced = node_best_score(d, 2, ParentSet::of({0}), ScoreConfig{}).score;
    CHECK(s.final_value == doctest::Approx(full - reduced).epsilon(1e-9));
    CHECK(s.per_step.size() == 200);
    CHECK_THROWS_AS(parent_child_monitor(d, spec, 1, 2), InvalidArgument);
  }
  SUBCASE("a duplicated parent adds almost nothing") {
    int small = 0;
    for (int k = 0; k < 20; ++k) {
      TimeSeriesMatrix d = gen_appendix_b(200, 0.001, 40 + k).front().data;
      d.conservativeResize(Eigen::NoChange, 4);
      d.col(3) = d.col(0);
      ModelSpec spec;
      spec.nodes.resize(4);
      spec.nodes[1].parents = ParentSet::of({0, 3});
      small += std::abs(parent_child_monitor(d, spec, 1, 3).final_value) < 2.0;
    }
    CHECK(small >= 18);
  }
  SUBCASE("a strong parent is supported") {
    const auto reps = gen_appendix_b(300, 0.01, 9);
    int positive = 0;
    for (const auto& r : reps) positive += parent_child_monitor(r.data, chain3(), 1, 0).final_value > 0.0;
    CHECK(positive >= 95);
  }
}

TEST_CASE("node monitor on well-specified data") {
  auto spec = appendix_b_spec(300, 0.0, 21);
  spec.reps = 60;
  double outside = 0.0, lags = 0.0;
  int flagged_ac = 0;
  for (const auto& r : simulate_mdm(spec)) {
    const NodeFit f = fit_node(r.data, 1, chain3().nodes[1]);
    const MonitorReport m = node_monitor(f.run);
    REQUIRE(m.acf.size() == 21);
    CHECK(m.acf[0] == 1.0);
    double acc = 0.0;
    for (int t = 0; t < 300; ++t) CHECK(m.cusum[t] == doctest::Approx(acc += m.std_errors[t]));
    outside += static_cast<double>(m.acf_outside.size());
    lags += static_cast<double>(m.acf.size() - 1);
    flagged_ac += m.has(MonitorFlag::Autocorrelation);
  }
  const double rate = outside / lags;
  CHECK(rate > 0.02);
  CHECK(rate < 0.09);
  CHECK(flagged_ac <= 15);
}

TEST_CASE("node monitor moment check at T = 1000") {
  auto spec = appendix_b_spec(1000, 0.0, 31);
  spec.reps = 30;
  int pass = 0;
  for (const auto& r : simulate_mdm(spec)) {
    NodeModel m = chain3().nodes[2];
    m.delta = 1.0;
    const MonitorReport rep = node_monitor(fit_node(r.data, 2, m).run);
    pass += std::abs(rep.skewness) < 0.5 && std::abs(rep.excess_kurtosis) < 1.0;
  }
  CHECK(pass >= 27);
}

TEST_CASE("node monitor detects constructed faults") {
  SUBCASE("own-lag dependence") {
    int flagged = 0;
    for (int k = 0; k < 30; ++k) {
      const TimeSeriesMatrix d = testgen::ar1(300, 0.6, 1.0, 100 + k);
      flagged += node_monitor(fit_node(d, 0, NodeModel{}).run).has(MonitorFlag::Autocorrelation);
    }
    CHECK(flagged >= 24);
  }
  SUBCASE("level shift in the errors") {
    FilterRun run;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int t = 0; t < 200; ++t) {
      PredictiveSummary p;
      p.Q = 1.0;
      p.e = z(rng) + (t > 100 ? 1.0 : 0.0);
      run.predictives.push_back(p);
    }
    CHECK(node_monitor(run).has(MonitorFlag::Drift));
  }
  SUBCASE("growing variance") {
    FilterRun run;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int t = 0; t < 300; ++t) {
      PredictiveSummary p;
      p.e = z(rng) * (t < 150 ? 0.7 : 1.5);
      run.predictives.push_back(p);
    }
    const MonitorReport m = node_monitor(run);
    CHECK(m.has(MonitorFlag::Heteroscedasticity));
    CHECK(m.variance_ratio > 2.0);
  }
  SUBCASE("too short") { CHECK_THROWS_AS(node_monitor(FilterRun{}), InvalidArgument); }
}

TEST_CASE("lag augmentation") {
  const ModelSpec base = one_parent();
  const ModelSpec lagged = lag_augment(base, 1);
  CHECK(lagged.nodes[1].own_lag == 1);
  CHECK_THROWS_AS(lag_augment(base, 1, 2), InvalidArgument);

  const TimeSeriesMatrix d = testgen::regression_jump(100, 0.5, 0.5, -1, 1.0, 4);
  const NodeFit f = fit_node(d, 1, lagged.nodes[1]);
  CHECK(f.run.initial.dimension() == 3);
  CHECK(f.first_time == 1);
  CHECK(std::isnan(f.log_density[0]));

  int better = 0, simpler = 0;
  for (int k = 0; k < 30; ++k) {
    const TimeSeriesMatrix ar = testgen::ar1(200, 0.5, 1.0, 300 + k);
    const ModelSpec plain = ModelSpec{{NodeModel{}}};
    // Both start at t = 1 so the plain model gets no extra observation.
    const BayesFactorSeries bf = global_monitor(fit_model(ar, lag_augment(plain, 0), {}, 1), fit_model(ar, plain, {}, 1));
    better += bf.final_value > 0.0;
    CHECK(bf.first_time == 1);

    // Without dependence the unused coefficient costs a few log units, no more.
    const TimeSeriesMatrix wn = testgen::ar1(200, 0.0, 1.0, 600 + k);
    const double v = global_monitor(fit_model(wn, lag_augment(plain, 0), {}, 1), fit_model(wn, plain, {}, 1)).final_value;
    simpler += v < 0.0 && v > -6.0;
  }
  CHECK(better >= 28);
  CHECK(simpler >= 25);
}

TEST_CASE("log-transformed predictive") {
  PredictiveSummary p;
  p.f = 0.3;
  p.Q = 0.5;
  p.dof = 7.0;
  CHECK(transformed_log_density(p, 1.7, Transform::Identity) == log_predictive_density(p, 1.7));
  CHECK_THROWS_AS(transformed_log_density(p, 0.0, Transform::Log), InvalidArgument);

  // Integrate over u = ln y so the quadrature sees the Z density.
  boost::math::quadrature::sinh_sinh<double> q;
  const double mass = q.integrate([&](double u) {
    const double y = std::exp(u);
    if (!(y > 0.0) || !std::isfinite(y)) return 0.0;
    return std::exp(transformed_log_density(p, y, Transform::Log)) * y;
  });
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  int better = 0;
  for (int k = 0; k < 20; ++k) {
    const TimeSeriesMatrix d = testgen::lognormal(200, 1.0, 0.8, 800 + k);
    NodeModel logm;
    logm.transform = Transform::Log;
    better += fit_node(d, 0, logm).lpl > fit_node(d, 0, NodeModel{}).lpl;
  }
  CHECK(better >= 19);

  const TimeSeriesMatrix neg = testgen::regression_jump(50, 1, 1, -1, 1, 1);
  NodeModel logm;
  logm.transform = Transform::Log;
  CHECK_THROWS_AS(fit_node(neg, 1, logm), InvalidArgument);
}

TEST_CASE("change points") {
  const ModelSpec spec = one_parent();
  SUBCASE("a coefficient jump is found") {
    int hit = 0;
    for (int k = 0; k < 30; ++k) {
      const TimeSeriesMatrix d = testgen::regression_jump(300, 0.8, -0.8, 150, 0.3, 500 + k);
      for (int t : detect_change_points(d, spec, 1))
        if (std::abs(t - 150) <= 5) {
          ++hit;
          break;
        }
    }
    CHECK(hit >= 20);
  }
  SUBCASE("threshold zero never flags") {
    const TimeSeriesMatrix d = testgen::regression_jump(300, 0.8, -0.8, 150, 0.3, 1);
    ChangePointOptions o;
    o.threshold = 0.0;
    CHECK(detect_change_points(d, spec, 1, o).empty());
    o.mode = ChangePointMode::Instantaneous;
    CHECK(detect_change_points(d, spec, 1, o).empty());
  }
  SUBCASE("refractory window") {
    const TimeSeriesMatrix d = testgen::regression_jump(300, 0.8, -0.8, 150, 0.3, 2);
    ChangePointOptions o;
    o.mode = ChangePointMode::Instantaneous;
    const auto times = detect_change_points(d, spec, 1, o);
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] - times[i - 1] > o.refractory);
  }
  SUBCASE("inflation one is a no-op") {
    const TimeSeriesMatrix d = testgen::regression_jump(120, 0.8, -0.8, 60, 0.3, 3);
    const NodeFit plain = fit_node(d, 1, spec.nodes[1]);
    const NodeFit same = fit_node(d, 1, apply_change_points(spec, 1, {60}, 1.0).nodes[1]);
    CHECK(same.lpl == plain.lpl);
    CHECK(same.run.delta == plain.run.delta);
  }
  SUBCASE("inflating at the jump helps") {
    int faster = 0, higher = 0;
    for (int k = 0; k < 30; ++k) {
      const TimeSeriesMatrix d = testgen::regression_jump(300, 0.8, -0.8, 150, 0.3, 700 + k);
      NodeModel m = spec.nodes[1];
      m.delta = 0.98;
      const NodeFit plain = fit_node(d, 1, m);
      ModelSpec s = spec;
      s.nodes[1] = m;
      const NodeFit cp = fit_node(d, 1, apply_change_points(s, 1, {150}).nodes[1]);
      double e_plain = 0.0, e_cp = 0.0;
      for (int t = 151; t < 171; ++t) {
        e_plain += std::abs(plain.run.predictives[t].e);
        e_cp += std::abs(cp.run.predictives[t].e);
      }
      faster += e_cp < e_plain;
      higher += cp.lpl > plain.lpl;
    }
    CHECK(faster >= 27);
    CHECK(higher >= 27);
  }
  SUBCASE("bad inputs") {
    const TimeSeriesMatrix d = testgen::regression_jump(50, 0.8, 0.8, -1, 0.3, 1);
    CHECK_THROWS_AS(fit_node(d, 1, apply_change_points(spec, 1, {60}).nodes[1]), InvalidArgument);
    ChangePointOptions o;
    o.threshold = -1.0;
    CHECK_THROWS_AS(detect_change_points(d, spec, 1, o), InvalidArgument);
  }
}

TEST_CASE("heteroscedastic variance law") {
  const ModelSpec spec = one_parent();
  const TimeSeriesMatrix d = testgen::heteroscedastic(200, 2.0, 1.5, 0.3, 1);
  const NodeFit plain = fit_node(d, 1, spec.nodes[1]);
  const NodeFit zero = fit_node(d, 1, heteroscedastic(spec, 1, 0.0).nodes[1]);
  CHECK(zero.lpl == plain.lpl);

  int better = 0;
  for (int k = 0; k < 20; ++k) {
    const TimeSeriesMatrix h = testgen::heteroscedastic(200, 2.0, 1.5, 0.3, 50 + k);
    const ModelFit a = fit_model(h, heteroscedastic(spec, 1));
    const ModelFit b = fit_model(h, spec);
    const BayesFactorSeries bf = global_monitor(a, b);
    better += bf.final_value > 0.0;
    CHECK(bf.final_value == doctest::Approx(a.nodes[1].lpl - b.nodes[1].lpl).epsilon(1e-12));
  }
  CHECK(better >= 18);
}
