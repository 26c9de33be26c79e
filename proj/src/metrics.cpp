#include "mdmnet/metrics.hpp"

#include "mdmnet/error.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mdm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(int num, int den) { return den == 0 ? kNaN : static_cast<double>(num) / den; }

void same_size(const Dag& a, const Dag& b) {
  if (a.size() != b.size()) throw InvalidArgument("graphs differ in node count");
}

bool linked(const Dag& g, int i, int j) { return g.has_edge(i, j) || g.has_edge(j, i); }

}  // namespace

ConfusionCounts confusion(const Dag& truth, const Dag& estimate) {
  same_size(truth, estimate);
  ConfusionCounts c;
  const int n = truth.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool t = linked(truth, i, j);
      const bool e = linked(estimate, i, j);
      if (t && e) ++c.tp;
      else if (e) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
  return c;
}

CSensitivity c_sensitivity(const ConfusionCounts& c) {
  return {ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp), ratio(c.tp, c.tp + c.fp), ratio(c.tn, c.tn + c.fn),
          ratio(c.tp + c.tn, c.total())};
}

double d_accuracy(const Dag& truth, const Dag& estimate) {
  same_size(truth, estimate);
  int matched = 0, correct = 0;
  for (const auto& [i, j] : estimate.edges()) {
    if (!linked(truth, i, j)) continue;
    ++matched;
    correct += truth.has_edge(i, j);
  }
  return ratio(correct, matched);
}

std::vector<double> hpd_coverage(const SmoothedTrajectory& smoothed, const Eigen::MatrixXd& truth) {
  if (truth.rows() != smoothed.hpd_lo.rows() || truth.cols() != smoothed.hpd_lo.cols())
    throw InvalidArgument("truth and smoothed trajectories differ in shape");
  std::vector<double> out(truth.cols(), kNaN);
  const Eigen::Index T = truth.rows();
  for (Eigen::Index k = 0; k < truth.cols(); ++k) {
    if (T == 0) continue;
    int inside = 0;
    for (Eigen::Index t = 0; t < T; ++t)
      inside += truth(t, k) >= smoothed.hpd_lo(t, k) && truth(t, k) <= smoothed.hpd_hi(t, k);
    out[k] = static_cast<double>(inside) / static_cast<double>(T);
  }
  return out;
}

GroupPrevalence group_prevalence(const std::vector<Dag>& dags) {
  if (dags.empty()) throw InvalidArgument("group prevalence needs at least one subject");
  const int n = dags.front().size();
  GroupPrevalence g;
  g.subjects = static_cast<int>(dags.size());
  g.phat = Eigen::MatrixXd::Zero(n, n);
  for (const Dag& d : dags) {
    if (d.size() != n) throw InvalidArgument("subjects differ in node count");
    g.phat += d.adjacency().cast<double>();
  }
  g.phat /= g.subjects;
  g.pi = n > 1 ? g.phat.sum() / (n * (n - 1.0)) : 0.0;
  return g;
}

Eigen::MatrixXd prevalence_p_values(const GroupPrevalence& prev) {
  if (prev.subjects < 1) throw InvalidArgument("subject count must be positive");
  const Eigen::Index n = prev.phat.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const int count = static_cast<int>(std::lround(prev.phat(i, j) * prev.subjects));
      if (count == 0 || prev.pi <= 0.0 || prev.pi >= 1.0) {
        p(i, j) = 1.0;
      } else {
        const boost::math::binomial_distribution<double> bin(prev.subjects, prev.pi);
        p(i, j) = boost::math::cdf(boost::math::complement(bin, count - 1));
      }
    }
  return p;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> fdr_significant(const GroupPrevalence& prev, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  const Eigen::MatrixXd p = prevalence_p_values(prev);
  const Eigen::Index n = p.rows();
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  std::vector<std::pair<double, Eigen::Index>> tests;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) tests.emplace_back(p(i, j), i * n + j);
  std::sort(tests.begin(), tests.end());
  const double m = static_cast<double>(tests.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < tests.size(); ++r)
    if (tests[r].first <= alpha * static_cast<double>(r + 1) / m && alpha > 0.0) k = r + 1;
  for (std::size_t r = 0; r < k; ++r) mask(tests[r].second / n, tests[r].second % n) = true;
  return mask;
}

double nan_mean(const std::vector<double>& values, int* skipped) {
  double s = 0.0;
  int used = 0, nan = 0;
  for (double v : values) {
    if (std::isnan(v)) {
      ++nan;
      continue;
    }
    s += v;
    ++used;
  }
  if (skipped) *skipped = nan;
  return used == 0 ? kNaN : s / used;
}

}  // namespace mdm
