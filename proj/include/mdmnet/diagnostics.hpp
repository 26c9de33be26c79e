#pragma once

// Prequential model criticism: Bayes factor monitors between model variants,
// per-node forecast-error checks, and the model embellishments they suggest
// (own-lag terms, log transform, change points, variance laws).

#include "mdmnet/dag.hpp"
#include "mdmnet/dlm.hpp"
#include "mdmnet/scores.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mdm {

enum class Transform { Identity, Log };

/// Design recipe for one node.
struct NodeModel {
  ParentSet parents;
  /// 0 or 1.
  int own_lag = 0;
  Transform transform = Transform::Identity;
  /// 0-based data times whose prior covariance is inflated.
  std::vector<int> change_points;
  double inflation = 100.0;
  /// Observation variance multiplier, see FilterOptions::variance_power.
  double variance_power = 0.0;
  double variance_floor = 1e-8;
  /// Fixed discount; otherwise the grid maximiser.
  std::optional<double> delta;

  friend bool operator==(const NodeModel&, const NodeModel&) = default;
};

struct ModelSpec {
  std::vector<NodeModel> nodes;

  static ModelSpec from_dag(const Dag& dag);
  int node_count() const { return static_cast<int>(nodes.size()); }
  /// Throws InvalidArgument when a recipe does not fit data with T rows.
  void validate(int T) const;
};

struct NodeFit {
  NodeModel model;
  FilterRun run;
  /// Data time of the run's first step.
  int first_time = 0;
  /// Log predictive densities on the original scale, length T; NaN before
  /// first_time.
  std::vector<double> log_density;
  /// Sum of log_density over scored steps.
  double lpl = 0.0;
};

struct ModelFit {
  std::vector<NodeFit> nodes;
  int T = 0;
  double lpl() const;
};

/// Filters the node from data time max(start, own_lag); earlier rows only
/// feed lagged regressors. Models compared by a monitor should share `start`
/// so that neither learns from observations the other never sees.
NodeFit fit_node(const TimeSeriesMatrix& data, int node, const NodeModel& model, const ScoreConfig& cfg = {},
                 int start = 0);
ModelFit fit_model(const TimeSeriesMatrix& data, const ModelSpec& spec, const ScoreConfig& cfg = {}, int start = 0);

struct BayesFactorSeries {
  /// Length T log density differences; zero before first_time.
  std::vector<double> per_step;
  std::vector<double> cumulative;
  double final_value = 0.0;
  /// First data time both models score.
  int first_time = 0;
};

/// Log Bayes factor A over B, summed over the nodes whose recipes differ and
/// restricted to times both score.
BayesFactorSeries global_monitor(const ModelFit& a, const ModelFit& b);

/// Node r with its full parent set against the set without `parent`, each
/// refit with its own best discount.
BayesFactorSeries parent_child_monitor(const TimeSeriesMatrix& data, const ModelSpec& spec, int node, int parent,
                                       const ScoreConfig& cfg = {});

enum class MonitorFlag { Autocorrelation, Drift, Heteroscedasticity, NonNormality };

const char* to_string(MonitorFlag f);

struct MonitorOptions {
  /// Leading steps excluded from the statistics while the variance estimate
  /// settles.
  int burn_in = 10;
  double drift_threshold = 2.5;
  double variance_ratio_alpha = 0.01;
  double skew_limit = 0.5;
  double kurtosis_limit = 1.0;
};

struct MonitorReport {
  /// e_t / sqrt(Q_t) for every step of the run.
  std::vector<double> std_errors;
  /// acf[0] = 1, then lags 1..L of the post burn-in errors.
  std::vector<double> acf;
  double acf_band = 0.0;
  /// Lags with |acf| above the band.
  std::vector<int> acf_outside;
  /// Running sum of std_errors.
  std::vector<double> cusum;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// max |partial sum| / (sd * sqrt(N)) over post burn-in errors.
  double drift_statistic = 0.0;
  /// Last-third over first-third variance ratio and its two-sided p-value.
  double variance_ratio = 1.0;
  double variance_ratio_p = 1.0;
  std::vector<MonitorFlag> flags;

  bool has(MonitorFlag f) const;
};

/// Requires at least burn_in + 20 steps.
MonitorReport node_monitor(const FilterRun& run, const MonitorOptions& opts = {});

/// Adds y_{t-1}(node) to the node's design; scoring then starts at t = 1.
ModelSpec lag_augment(const ModelSpec& spec, int node, int lag = 1);

/// Log density of Y = g^{-1}(Z) at y given the predictive for Z.
double transformed_log_density(const PredictiveSummary& z_pred, double y, Transform g);

enum class ChangePointMode { Cumulative, Instantaneous };

struct ChangePointOptions {
  double threshold = 0.3;
  int refractory = 10;
  int burn_in = 10;
  ChangePointMode mode = ChangePointMode::Cumulative;
};

/// Data times where the Bayes factor of the node's recipe against the
/// intercept-only recipe drops below the threshold. The cumulative form
/// tracks L_t = h_t + min(0, L_{t-1}) and restarts after each flag.
std::vector<int> detect_change_points(const TimeSeriesMatrix& data, const ModelSpec& spec, int node,
                                      const ChangePointOptions& opts = {}, const ScoreConfig& cfg = {});

ModelSpec apply_change_points(const ModelSpec& spec, int node, const std::vector<int>& times, double inflation = 100.0);

/// Sets the power variance law on one node.
ModelSpec heteroscedastic(const ModelSpec& spec, int node, double gamma = 2.0, double floor = 1e-8);

}  // namespace mdm
