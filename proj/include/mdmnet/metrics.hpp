#pragma once

// Structure-recovery and group-level summaries.

#include "mdmnet/dag.hpp"
#include "mdmnet/dlm.hpp"

#include <vector>

namespace mdm {

/// Skeleton comparison over the n(n-1)/2 unordered node pairs.
struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;

  int total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const Dag& truth, const Dag& estimate);

/// Ratios are NaN when their denominator is zero.
struct CSensitivity {
  double sensitivity;
  double specificity;
  double ppv;
  double npv;
  double success_rate;
};

CSensitivity c_sensitivity(const ConfusionCounts& c);

/// Among estimated edges whose pair is a true skeleton edge, the fraction
/// oriented as in the truth. NaN when there are none.
double d_accuracy(const Dag& truth, const Dag& estimate);

/// Per-column fraction of times with truth(t, k) inside [lo(t, k), hi(t, k)].
std::vector<double> hpd_coverage(const SmoothedTrajectory& smoothed, const Eigen::MatrixXd& truth);

struct GroupPrevalence {
  /// n x n proportions of subjects with edge i -> j.
  Eigen::MatrixXd phat;
  /// Mean of phat over the n(n-1) directed pairs.
  double pi = 0.0;
  int subjects = 0;
};

GroupPrevalence group_prevalence(const std::vector<Dag>& dags);

/// One-sided exact binomial p-values P(X >= count), X ~ Bin(subjects, pi), for
/// every off-diagonal pair (diagonal NaN).
Eigen::MatrixXd prevalence_p_values(const GroupPrevalence& prev);

/// Benjamini-Hochberg step-up over the n(n-1) directed pairs.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> fdr_significant(const GroupPrevalence& prev, double alpha = 0.05);

/// Mean over the finite values; `skipped` receives the count of NaNs.
double nan_mean(const std::vector<double>& values, int* skipped = nullptr);

}  // namespace mdm
