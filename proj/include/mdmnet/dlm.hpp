#pragma once

// Conjugate dynamic linear regression for a single node: discount-factor
// Kalman filtering with unknown constant observation variance, one-step
// Student-t predictives, and retrospective smoothing.

#include "mdmnet/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace mdm {

/// Normal-gamma prior: theta_0 ~ N(m0, V * Cstar0), 1/V ~ G(n0/2, d0/2).
struct NodePrior {
  Eigen::VectorXd m0;
  Eigen::MatrixXd Cstar0;
  double n0 = 0.001;
  double d0 = 0.001;

  int dimension() const { return static_cast<int>(m0.size()); }
  /// Throws InvalidArgument unless Cstar0 is symmetric positive-definite,
  /// n0 > 0, d0 > 0 and the dimensions agree.
  void validate() const;

  /// Zero mean, Cstar0 = cstar_scale * I.
  static NodePrior weakly_informative(int p, double cstar_scale = 3.0, double n0 = 0.001, double d0 = 0.001);
};

/// Posterior after t observations. C_t = V * Cstar.
struct FilterState {
  int t = 0;
  Eigen::VectorXd m;
  Eigen::MatrixXd Cstar;
  double n = 0.0;
  double d = 0.0;

  double S() const { return d / n; }
  int dimension() const { return static_cast<int>(m.size()); }

  static FilterState from_prior(const NodePrior& prior);
};

/// One-step forecast Y_t | D_{t-1} ~ T_dof(f, Q).
struct PredictiveSummary {
  double f = 0.0;
  double Q = 1.0;
  double dof = 1.0;
  double e = 0.0;
  double log_density = 0.0;
  /// Q / S_{t-1}; the variance-scaled forecast variance.
  double Qstar = 1.0;
};

/// Per-step covariate rows F_t'. Column 0 is the intercept (all ones), then
/// parent series in ascending node order, then the node's own lag when
/// augmented. Row 0 corresponds to data row first_time().
class RegressionDesign {
 public:
  RegressionDesign() = default;
  RegressionDesign(Eigen::MatrixXd rows, int first_time = 0);

  static RegressionDesign intercept_only(int T);
  /// Design for `node` regressed on `parents`. With own_lag = 1 the rows
  /// start at data time 1 and gain the column y_{t-1}(node).
  static RegressionDesign from_parents(const TimeSeriesMatrix& data, int node, ParentSet parents, int own_lag = 0);

  int length() const { return static_cast<int>(rows_.rows()); }
  int dimension() const { return static_cast<int>(rows_.cols()); }
  int first_time() const { return first_time_; }
  const Eigen::MatrixXd& rows() const { return rows_; }
  Eigen::VectorXd row(int t) const { return rows_.row(t).transpose(); }

 private:
  Eigen::MatrixXd rows_;
  int first_time_ = 0;
};

/// Response column aligned with RegressionDesign::from_parents(.., own_lag).
Eigen::VectorXd response(const TimeSeriesMatrix& data, int node, int own_lag = 0);

/// Per-run modifications of the plain discount filter.
struct FilterOptions {
  /// Step indices (0-based, relative to the run) at which R*_t is multiplied
  /// by `inflation` for that step only.
  std::vector<int> inflate_at;
  double inflation = 100.0;
  /// Observation variance law V_t = V * max(k_t^(variance_power / 2), variance_floor)
  /// with k_t = f_t^2 + S_{t-1} F_t' R*_t F_t, the prior expectation of mu_t^2.
  double variance_power = 0.0;
  double variance_floor = 1e-8;
};

struct FilterRun {
  FilterState initial;
  std::vector<FilterState> states;
  std::vector<PredictiveSummary> predictives;
  /// Multiplier applied to C*_{t-1} to form R*_t at each step (1/delta, or
  /// inflation/delta at change points).
  std::vector<double> prior_scale;
  double lpl = 0.0;
  double delta = 1.0;

  int length() const { return static_cast<int>(predictives.size()); }
};

struct SmoothedTrajectory {
  Eigen::MatrixXd means;   // T x p
  Eigen::MatrixXd scales;  // T x p marginal Student-t scales (standard deviation units)
  double dof = 0.0;
  double level = 0.95;
  Eigen::MatrixXd hpd_lo;
  Eigen::MatrixXd hpd_hi;
};

/// Log density of the Student-t with `dof` degrees of freedom, location f
/// and scale (variance-like) Q, evaluated at y.
double student_t_log_density(double y, double dof, double f, double Q);

double log_predictive_density(const PredictiveSummary& pred, double y);

/// One discount-filter update. `prior_inflation` multiplies R*_t and
/// `obs_scale` multiplies the observation variance for this step only.
std::pair<FilterState, PredictiveSummary> filter_step(const FilterState& state, double y,
                                                      const Eigen::VectorXd& F, double delta,
                                                      double prior_inflation = 1.0, double obs_scale = 1.0);

FilterRun filter_series(std::span<const double> y, const RegressionDesign& design, double delta,
                        const NodePrior& prior, const FilterOptions& options = {});
FilterRun filter_series(const Eigen::VectorXd& y, const RegressionDesign& design, double delta,
                        const NodePrior& prior, const FilterOptions& options = {});

/// Log predictive likelihood of the plain discount model without retaining
/// states. Same recurrences as filter_series, allocation-free per step; the
/// score table is built on this.
double log_predictive_likelihood(std::span<const double> y, const RegressionDesign& design, double delta,
                                 const NodePrior& prior);

/// Retrospective (fixed-interval) smoothing of a filter run.
SmoothedTrajectory smooth(const FilterRun& run, double level = 0.95);

}  // namespace mdm
