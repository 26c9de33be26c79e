#include "mdmnet/lp.hpp"

#include "mdmnet/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace mdm {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration limit";
  }
  return "unknown";
}

int LpProblem::add_row(RowSense s, double b) {
  sense.push_back(s);
  rhs.push_back(b);
  return row_count() - 1;
}

int LpProblem::add_column(double cost, std::vector<std::pair<int, double>> entries) {
  columns.push_back(std::move(entries));
  objective.push_back(cost);
  return column_count() - 1;
}

void LpProblem::validate() const {
  if (objective.size() != columns.size()) throw InvalidArgument("objective and column counts differ");
  if (sense.size() != rhs.size()) throw InvalidArgument("row sense and rhs counts differ");
  for (double b : rhs)
    if (!std::isfinite(b)) throw InvalidArgument("non-finite right-hand side");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (!std::isfinite(objective[j])) throw InvalidArgument("non-finite objective coefficient");
    for (const auto& [i, a] : columns[j])
      if (i < 0 || i >= row_count() || !std::isfinite(a))
        throw InvalidArgument("bad entry in column " + std::to_string(j));
  }
}

namespace {

using Column = std::vector<std::pair<int, double>>;

class Simplex {
 public:
  Simplex(const LpProblem& lp, const LpOptions& opts) : lp_(lp), opts_(opts), m_(lp.row_count()) {
    n_struct_ = lp.column_count();
    b_.resize(m_);
    std::vector<double> sign(m_, 1.0);
    std::vector<RowSense> sense(lp.sense);
    for (int i = 0; i < m_; ++i) {
      if (lp.rhs[i] < 0.0) {
        sign[i] = -1.0;
        if (sense[i] == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
        else if (sense[i] == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
      }
      b_[i] = sign[i] * lp.rhs[i];
    }
    row_sign_ = sign;
    for (int j = 0; j < n_struct_; ++j) {
      Column c;
      c.reserve(lp.columns[j].size());
      for (const auto& [i, a] : lp.columns[j])
        if (a != 0.0) c.emplace_back(i, sign[i] * a);
      cols_.push_back(std::move(c));
    }
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (sense[i] == RowSense::Equal) continue;
      cols_.push_back({{i, sense[i] == RowSense::LessEqual ? 1.0 : -1.0}});
      if (sense[i] == RowSense::LessEqual) basis_[i] = static_cast<int>(cols_.size()) - 1;
    }
    first_artificial_ = static_cast<int>(cols_.size());
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= 0) continue;
      cols_.push_back({{i, 1.0}});
      basis_[i] = static_cast<int>(cols_.size()) - 1;
    }
    is_basic_.assign(cols_.size(), 0);
    for (int j : basis_) is_basic_[j] = 1;
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = b_;
    cost_.assign(cols_.size(), 0.0);
  }

  LpResult run() {
    LpResult out;
    for (std::size_t j = first_artificial_; j < cols_.size(); ++j) cost_[j] = 1.0;
    LpStatus st = iterate(out.iterations);
    if (st == LpStatus::IterationLimit) return finish(out, st);
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= first_artificial_) infeas += xb_[i];
    if (infeas > opts_.feasibility_tol * (1.0 + b_.lpNorm<Eigen::Infinity>())) return finish(out, LpStatus::Infeasible);
    drive_out_artificials();

    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = -lp_.objective[j];
    phase2_ = true;
    st = iterate(out.iterations);
    return finish(out, st);
  }

 private:
  bool artificial(int j) const { return j >= first_artificial_; }

  void column_times_binv(int j, Eigen::VectorXd& u) const {
    u.setZero(m_);
    for (const auto& [i, a] : cols_[j]) u.noalias() += a * binv_.col(i);
  }

  double dot_column(const Eigen::VectorXd& y, int j) const {
    double s = 0.0;
    for (const auto& [i, a] : cols_[j]) s += y[i] * a;
    return s;
  }

  void refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int k = 0; k < m_; ++k)
      for (const auto& [i, a] : cols_[basis_[k]]) B(i, k) = a;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) throw NumericalError("simplex basis became singular (" + std::to_string(m_) + " rows)");
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (int i = 0; i < m_; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -opts_.feasibility_tol) xb_[i] = 0.0;
    since_refactor_ = 0;
  }

  void pivot(int r, int j, const Eigen::VectorXd& u, double step) {
    xb_ -= step * u;
    xb_[r] = step;
    const double piv = u[r];
    binv_.row(r) /= piv;
    for (int i = 0; i < m_; ++i)
      if (i != r && u[i] != 0.0) binv_.row(i) -= u[i] * binv_.row(r);
    is_basic_[basis_[r]] = 0;
    basis_[r] = j;
    is_basic_[j] = 1;
    for (int i = 0; i < m_; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -opts_.feasibility_tol) xb_[i] = 0.0;
    if (++since_refactor_ >= opts_.refactor_every) refactor();
  }

  LpStatus iterate(long& iterations) {
    Eigen::VectorXd y(m_), u(m_), cb(m_);
    int degenerate = 0;
    const int ncols = static_cast<int>(cols_.size());
    while (true) {
      if (iterations >= opts_.max_iterations) return LpStatus::IterationLimit;
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      y.noalias() = binv_.transpose() * cb;
      const bool bland = degenerate > 50;
      int enter = -1;
      double best = -opts_.optimality_tol;
      for (int j = 0; j < ncols; ++j) {
        if (is_basic_[j] || (phase2_ && artificial(j))) continue;
        const double d = cost_[j] - dot_column(y, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      column_times_binv(enter, u);
      int leave = -1;
      double step = std::numeric_limits<double>::infinity();
      constexpr double kPivotTol = 1e-9;
      for (int i = 0; i < m_; ++i) {
        double t;
        if (phase2_ && artificial(basis_[i]) && std::abs(u[i]) > kPivotTol) {
          t = 0.0;
        } else if (u[i] > kPivotTol) {
          t = std::max(xb_[i], 0.0) / u[i];
        } else {
          continue;
        }
        const bool tie = t <= step + 1e-12 && leave >= 0 &&
                         (bland ? basis_[i] < basis_[leave] : std::abs(u[i]) > std::abs(u[leave]));
        if (leave < 0 || t < step - 1e-12 || tie) {
          leave = i;
          step = std::min(step, t);
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      step = std::max(xb_[leave], 0.0) / u[leave];
      if (phase2_ && artificial(basis_[leave])) step = 0.0;
      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter, u, step);
      ++iterations;
    }
  }

  void drive_out_artificials() {
    Eigen::VectorXd u(m_);
    for (int r = 0; r < m_; ++r) {
      if (!artificial(basis_[r])) continue;
      for (int j = 0; j < first_artificial_; ++j) {
        if (is_basic_[j]) continue;
        const double v = dot_column(binv_.row(r).transpose(), j);
        if (std::abs(v) > 1e-7) {
          column_times_binv(j, u);
          pivot(r, j, u, 0.0);
          break;
        }
      }
    }
  }

  LpResult& finish(LpResult& out, LpStatus st) {
    out.status = st;
    out.x.assign(n_struct_, 0.0);
    if (st == LpStatus::Infeasible) return out;
    refactor();
    for (int i = 0; i < m_; ++i) {
      if (xb_[i] < -1e3 * opts_.feasibility_tol)
        throw NumericalError("simplex lost primal feasibility (basic value " + std::to_string(xb_[i]) + ")");
      if (basis_[i] < n_struct_) out.x[basis_[i]] = std::max(xb_[i], 0.0);
    }
    out.objective = 0.0;
    for (int j = 0; j < n_struct_; ++j) out.objective += lp_.objective[j] * out.x[j];
    if (st == LpStatus::Optimal) {
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      const Eigen::VectorXd y = binv_.transpose() * cb;
      out.duals.resize(m_);
      for (int i = 0; i < m_; ++i) out.duals[i] = -y[i] * row_sign_[i];
    }
    return out;
  }

  const LpProblem& lp_;
  LpOptions opts_;
  int m_;
  int n_struct_ = 0;
  int first_artificial_ = 0;
  bool phase2_ = false;
  int since_refactor_ = 0;
  std::vector<Column> cols_;
  std::vector<double> cost_;
  std::vector<double> row_sign_;
  std::vector<int> basis_;
  std::vector<char> is_basic_;
  Eigen::VectorXd b_;
  Eigen::VectorXd xb_;
  Eigen::MatrixXd binv_;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, const LpOptions& opts) {
  lp.validate();
  if (lp.row_count() == 0) {
    LpResult out;
    out.x.assign(lp.column_count(), 0.0);
    for (int j = 0; j < lp.column_count(); ++j)
      if (lp.objective[j] > 0.0) {
        out.status = LpStatus::Unbounded;
        return out;
      }
    out.status = LpStatus::Optimal;
    return out;
  }
  return Simplex(lp, opts).run();
}

}  // namespace mdm
