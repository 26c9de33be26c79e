#include "mdmnet/synthgen.hpp"

#include "mdmnet/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mdm {

void GeneratorSpec::validate() const {
  const int n = dag.size();
  if (n < 1) throw InvalidArgument("generator needs at least one node");
  if (!dag.is_acyclic()) throw InvalidArgument("generator graph has a cycle");
  if (static_cast<int>(theta0.size()) != n || static_cast<int>(V.size()) != n || static_cast<int>(wstar.size()) != n)
    throw InvalidArgument("generator parameters do not cover every node");
  for (int r = 0; r < n; ++r) {
    const int p = 1 + dag.parents(r).size();
    if (theta0[r].size() != p) throw InvalidArgument("theta0 dimension mismatch at node " + std::to_string(r + 1));
    if (wstar[r].size() != p) throw InvalidArgument("W* dimension mismatch at node " + std::to_string(r + 1));
    if (!(V[r] > 0.0)) throw InvalidArgument("observation variance must be positive");
    if ((wstar[r].array() < 0.0).any()) throw InvalidArgument("W* diagonal must be non-negative");
  }
  if (T < 1) throw InvalidArgument("series length must be positive");
  if (reps < 1) throw InvalidArgument("replication count must be positive");
}

Replication simulate_replication(const GeneratorSpec& spec, int rep) {
  spec.validate();
  const int n = spec.node_count();
  const auto order = *spec.dag.topological_order();
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(rep), 0x4d444du};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> z(0.0, 1.0);

  Replication out;
  out.data.resize(spec.T, n);
  out.theta.resize(n);
  std::vector<Eigen::VectorXd> theta(spec.theta0);
  std::vector<Eigen::VectorXd> w_sd(n);
  std::vector<std::vector<int>> parents(n);
  for (int r = 0; r < n; ++r) {
    out.theta[r].resize(spec.T, theta[r].size());
    w_sd[r] = (spec.wstar[r] * spec.V[r]).array().sqrt().matrix();
    parents[r] = spec.dag.parents(r).members();
  }
  for (int t = 0; t < spec.T; ++t) {
    for (int r : order) {
      Eigen::VectorXd& th = theta[r];
      for (Eigen::Index k = 0; k < th.size(); ++k) th[k] += w_sd[r][k] * z(rng);
      double y = th[0];
      for (std::size_t k = 0; k < parents[r].size(); ++k) y += th[1 + static_cast<Eigen::Index>(k)] * out.data(t, parents[r][k]);
      y += std::sqrt(spec.V[r]) * z(rng);
      out.data(t, r) = y;
      out.theta[r].row(t) = th.transpose();
    }
  }
  return out;
}

std::vector<Replication> simulate_mdm(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<Replication> out;
  out.reserve(spec.reps);
  for (int i = 0; i < spec.reps; ++i) out.push_back(simulate_replication(spec, i));
  return out;
}

GeneratorSpec appendix_a_spec(std::uint64_t seed) {
  constexpr int n = 11;
  GeneratorSpec spec;
  // 1-based (from, to, theta0) as listed for the synthetic 11-region study.
  struct Edge {
    int from, to;
    double theta;
  };
  const Edge edges[] = {{2, 4, 0.25}, {8, 4, 0.18}, {3, 5, 0.50}, {7, 6, 0.80}, {8, 7, 0.39}, {10, 9, 0.65}};
  std::vector<std::pair<int, int>> e0;
  for (const auto& e : edges) e0.emplace_back(e.from - 1, e.to - 1);
  spec.dag = Dag::from_edges(n, e0);
  spec.V = {0.010, 0.191, 0.036, 0.005, 0.018, 0.011, 0.010, 0.006, 0.016, 0.014, 0.013};
  spec.theta0.resize(n);
  spec.wstar.resize(n);
  for (int r = 0; r < n; ++r) {
    const auto members = spec.dag.parents(r).members();
    const int p = 1 + static_cast<int>(members.size());
    spec.theta0[r] = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < members.size(); ++k)
      for (const auto& e : edges)
        if (e.to - 1 == r && e.from - 1 == members[k]) spec.theta0[r][1 + static_cast<Eigen::Index>(k)] = e.theta;
    spec.wstar[r] = Eigen::VectorXd::Constant(p, 0.05);
  }
  spec.T = 230;
  spec.reps = 50;
  spec.seed = seed;
  return spec;
}

GeneratorSpec appendix_b_spec(int T, double wstar, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.dag = Dag::from_edges(3, {{0, 1}, {1, 2}});
  spec.V = {12.5, 6.3, 5.0};
  spec.theta0 = {Eigen::VectorXd::Zero(1), Eigen::Vector2d(0.0, 0.3), Eigen::Vector2d(0.0, 0.2)};
  spec.wstar = {Eigen::VectorXd::Constant(1, wstar), Eigen::VectorXd::Constant(2, wstar),
                Eigen::VectorXd::Constant(2, wstar)};
  spec.T = T;
  spec.reps = 100;
  spec.seed = seed;
  return spec;
}

std::vector<Replication> gen_appendix_a(std::uint64_t seed) { return simulate_mdm(appendix_a_spec(seed)); }

std::vector<Replication> gen_appendix_b(int T, double wstar, std::uint64_t seed) {
  return simulate_mdm(appendix_b_spec(T, wstar, seed));
}

}  // namespace mdm
