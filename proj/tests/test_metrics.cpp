#include "doctest.h"

#include "mdmnet/error.hpp"
#include "mdmnet/metrics.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <cmath>
#include <random>

using namespace mdm;

namespace {

const Dag kDag1 = Dag::from_edges(3, {{0, 1}, {1, 2}});
const Dag kDag2 = Dag::from_edges(3, {{2, 1}, {1, 0}});

Dag random_dag(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution edge(p);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Dag d(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) d.set_parents(order[b], d.parents(order[b]).with(order[a]));
  return d;
}

}  // namespace

TEST_CASE("confusion counts") {
  CHECK(confusion(kDag1, kDag1) == ConfusionCounts{2, 0, 1, 0});
  CHECK(confusion(kDag1, kDag2) == ConfusionCounts{2, 0, 1, 0});
  CHECK(confusion(kDag1, Dag(3)) == ConfusionCounts{0, 0, 1, 2});
  CHECK_THROWS_AS(confusion(kDag1, Dag(4)), InvalidArgument);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Dag t = random_dag(rng, 7, 0.3), e = random_dag(rng, 7, 0.3);
    const ConfusionCounts c = confusion(t, e);
    CHECK(c.total() == 21);
    CHECK(confusion(t, e.reversed()) == c);
    const CSensitivity s = c_sensitivity(c);
    for (double v : {s.sensitivity, s.specificity, s.ppv, s.npv, s.success_rate})
      if (!std::isnan(v)) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("c-sensitivity ratios") {
  const CSensitivity perfect = c_sensitivity(confusion(kDag1, kDag1));
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.specificity == 1.0);
  CHECK(perfect.ppv == 1.0);
  CHECK(perfect.npv == 1.0);
  CHECK(perfect.success_rate == 1.0);

  const CSensitivity empty = c_sensitivity(confusion(kDag1, Dag(3)));
  CHECK(empty.sensitivity == 0.0);
  CHECK(empty.specificity == 1.0);
  CHECK(std::isnan(empty.ppv));
  CHECK(empty.npv == doctest::Approx(1.0 / 3.0));
  CHECK(empty.success_rate == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("d-accuracy") {
  CHECK(d_accuracy(kDag1, kDag1) == 1.0);
  CHECK(d_accuracy(kDag1, kDag1.reversed()) == 0.0);
  CHECK(std::isnan(d_accuracy(kDag1, Dag(3))));
  // One of two matched edges points the right way; the extra edge is ignored.
  const Dag est = Dag::from_edges(3, {{0, 1}, {2, 1}, {0, 2}});
  CHECK(d_accuracy(kDag1, est) == 0.5);

  std::mt19937_64 rng(2);
  for (int k = 0; k < 30; ++k) {
    const Dag t = random_dag(rng, 6, 0.4);
    Dag e(6);
    // Same skeleton, random orientation.
    std::bernoulli_distribution flip(0.5);
    for (const auto& [i, j] : t.edges()) {
      if (flip(rng)) e.set_parents(i, e.parents(i).with(j));
      else e.set_parents(j, e.parents(j).with(i));
    }
    const double a = d_accuracy(t, e), b = d_accuracy(t, e.reversed());
    if (!std::isnan(a)) CHECK(a + b == doctest::Approx(1.0));
  }
}

TEST_CASE("hpd coverage") {
  SmoothedTrajectory s;
  s.means = Eigen::MatrixXd::Zero(4, 2);
  s.hpd_lo = Eigen::MatrixXd::Constant(4, 2, -1.0);
  s.hpd_hi = Eigen::MatrixXd::Constant(4, 2, 1.0);
  CHECK(hpd_coverage(s, s.means) == std::vector<double>{1.0, 1.0});
  Eigen::MatrixXd truth = s.means;
  truth(0, 1) = 2.0;
  truth(3, 1) = -1.5;
  CHECK(hpd_coverage(s, truth) == std::vector<double>{1.0, 0.5});
  CHECK_THROWS_AS(hpd_coverage(s, Eigen::MatrixXd::Zero(3, 2)), InvalidArgument);
}

TEST_CASE("group prevalence") {
  const GroupPrevalence one = group_prevalence({kDag1});
  CHECK(one.phat == kDag1.adjacency().cast<double>());
  CHECK(one.pi == doctest::Approx(2.0 / 6.0));

  const GroupPrevalence same = group_prevalence({kDag1, kDag1, kDag1});
  CHECK(((same.phat.array() == 0.0) || (same.phat.array() == 1.0)).all());

  std::vector<Dag> subjects;
  for (int s = 0; s < 15; ++s) subjects.push_back(s < 9 ? kDag1 : Dag(3));
  const GroupPrevalence g = group_prevalence(subjects);
  CHECK(g.phat(0, 1) == doctest::Approx(0.6));
  CHECK(g.subjects == 15);
  CHECK_THROWS_AS(group_prevalence({}), InvalidArgument);
  CHECK_THROWS_AS(group_prevalence({kDag1, Dag(4)}), InvalidArgument);
}

TEST_CASE("fdr significance") {
  SUBCASE("uniform prevalence gives nothing") {
    // Every directed pair present in exactly 3 of 12 subjects.
    std::vector<Dag> subjects;
    for (int s = 0; s < 12; ++s) {
      Dag d(4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (i != j && (s + i + 2 * j) % 4 == 0) d.set_parents(j, d.parents(j).with(i));
      subjects.push_back(d);
    }
    const GroupPrevalence g = group_prevalence(subjects);
    CHECK(g.phat.sum() / 12.0 == doctest::Approx(g.pi));
    CHECK_FALSE(fdr_significant(g).any());
  }
  SUBCASE("an edge in every subject") {
    const int n = 11, S = 15;
    std::mt19937_64 rng(4);
    std::vector<Dag> subjects;
    for (int s = 0; s < S; ++s) {
      Dag d = random_dag(rng, n, 0.15);
      for (int i = 0; i < n; ++i) d.set_parents(i, d.parents(i).without(0));
      d.set_parents(1, d.parents(1).with(0));
      subjects.push_back(d);
    }
    const GroupPrevalence g = group_prevalence(subjects);
    const Eigen::MatrixXd p = prevalence_p_values(g);
    CHECK(p(0, 1) == doctest::Approx(std::pow(g.pi, S)).epsilon(1e-10));
    const auto mask = fdr_significant(g, 0.05);
    CHECK(mask(0, 1));
    CHECK_FALSE(fdr_significant(g, 0.0).any());
    // Monotone in alpha.
    const auto loose = fdr_significant(g, 0.2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (mask(i, j)) CHECK(loose(i, j));
  }
  SUBCASE("p-values against the binomial tail") {
    std::vector<Dag> subjects(10, Dag(3));
    for (int s = 0; s < 7; ++s) subjects[s] = kDag1;
    const GroupPrevalence g = group_prevalence(subjects);
    const boost::math::binomial_distribution<double> bin(10, g.pi);
    double tail = 0.0;
    for (int k = 7; k <= 10; ++k) tail += boost::math::pdf(bin, k);
    CHECK(prevalence_p_values(g)(0, 1) == doctest::Approx(tail).epsilon(1e-12));
    CHECK(prevalence_p_values(g)(1, 0) == 1.0);
  }
  SUBCASE("bad alpha") { CHECK_THROWS_AS(fdr_significant(group_prevalence({kDag1}), 1.5), InvalidArgument); }
}

TEST_CASE("nan mean skips undefined values") {
  int skipped = 0;
  CHECK(nan_mean({1.0, std::nan(""), 3.0}, &skipped) == 2.0);
  CHECK(skipped == 1);
  CHECK(std::isnan(nan_mean({std::nan("")})));
}
