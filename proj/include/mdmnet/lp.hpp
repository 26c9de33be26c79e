#pragma once

// Dense-basis revised simplex for small linear programs with sparse columns:
//   maximize c'x  subject to  row_i(x) {=, >=, <=} b_i,  x >= 0.

#include <cstdint>
#include <utility>
#include <vector>

namespace mdm {

enum class RowSense { Equal, GreaterEqual, LessEqual };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpProblem {
  /// Column j as (row, coefficient) pairs.
  std::vector<std::vector<std::pair<int, double>>> columns;
  std::vector<double> objective;
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  int row_count() const { return static_cast<int>(rhs.size()); }
  int column_count() const { return static_cast<int>(columns.size()); }

  int add_row(RowSense s, double b);
  int add_column(double cost, std::vector<std::pair<int, double>> entries);
  /// Throws InvalidArgument on out-of-range rows or non-finite data.
  void validate() const;
};

struct LpOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  long max_iterations = 200000;
  /// Basis refactorization period.
  int refactor_every = 64;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Row duals of the maximization (valid when Optimal).
  std::vector<double> duals;
  long iterations = 0;
};

/// Two-phase primal simplex with Dantzig pricing and a Bland fallback on
/// stalling. Throws NumericalError when the basis becomes singular.
LpResult solve_lp(const LpProblem& lp, const LpOptions& opts = {});

}  // namespace mdm
