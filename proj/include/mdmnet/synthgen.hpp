#pragma once

// Simulation from a linear MDM with random-walk coefficients:
//   theta_t(r) = theta_{t-1}(r) + w_t(r),  w_t(r) ~ N(0, V(r) diag(W*(r)))
//   y_t(r)     = F_t(r)' theta_t(r) + v_t(r),  v_t(r) ~ N(0, V(r))
// with theta_0 fixed and nodes generated in topological order.

#include "mdmnet/dag.hpp"
#include "mdmnet/types.hpp"

#include <cstdint>
#include <vector>

namespace mdm {

struct GeneratorSpec {
  Dag dag;
  /// Per node: intercept then one coefficient per parent (ascending index).
  std::vector<Eigen::VectorXd> theta0;
  /// Observation variance per node.
  std::vector<double> V;
  /// Per node diagonal of W*(r); same length as theta0[r].
  std::vector<Eigen::VectorXd> wstar;
  int T = 100;
  int reps = 1;
  std::uint64_t seed = 1;

  void validate() const;
  int node_count() const { return dag.size(); }
};

struct Replication {
  TimeSeriesMatrix data;                // T x n
  std::vector<Eigen::MatrixXd> theta;  // per node, T x p_r true coefficient path
};

/// One replication; independent of every other replication index.
Replication simulate_replication(const GeneratorSpec& spec, int rep);
std::vector<Replication> simulate_mdm(const GeneratorSpec& spec);

/// The 11-node network: 2->4, 8->4, 3->5, 8->7, 7->6, 10->9 (1-based), T = 230,
/// 50 replications, W* = 0.05 I.
GeneratorSpec appendix_a_spec(std::uint64_t seed);
/// The 3-node chain 1 -> 2 -> 3 with V = (12.5, 6.3, 5.0), 100 replications,
/// W* = wstar I.
GeneratorSpec appendix_b_spec(int T, double wstar, std::uint64_t seed);

std::vector<Replication> gen_appendix_a(std::uint64_t seed);
std::vector<Replication> gen_appendix_b(int T, double wstar, std::uint64_t seed);

}  // namespace mdm
