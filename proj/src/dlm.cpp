#include "mdmnet/dlm.hpp"

#include "mdmnet/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace mdm {

namespace {

constexpr int kMaxFastDim = 24;

// lgamma((nu+1)/2) - lgamma(nu/2) - log(nu*pi)/2 for nu = n0 + t, cached per
// thread because every (parent set, discount) run shares the same sequence.
const double* t_constants(double n0, int T) {
  thread_local double cached_n0 = -1.0;
  thread_local std::vector<double> values;
  if (cached_n0 != n0) {
    values.clear();
    cached_n0 = n0;
  }
  for (int t = static_cast<int>(values.size()); t < T; ++t) {
    const double nu = n0 + t;
    values.push_back(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi));
  }
  return values.data();
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("discount factor must lie in (0, 1], got " + std::to_string(delta));
}

}  // namespace

void NodePrior::validate() const {
  const int p = dimension();
  if (p < 1) throw InvalidArgument("prior dimension must be at least 1");
  if (Cstar0.rows() != p || Cstar0.cols() != p) throw InvalidArgument("prior covariance dimension does not match mean");
  if (!(n0 > 0.0) || !(d0 > 0.0)) throw InvalidArgument("prior n0 and d0 must be positive");
  if (!m0.allFinite() || !Cstar0.allFinite()) throw InvalidArgument("prior contains non-finite values");
  if ((Cstar0 - Cstar0.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + Cstar0.cwiseAbs().maxCoeff()))
    throw InvalidArgument("prior covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Cstar0);
  if (llt.info() != Eigen::Success) throw InvalidArgument("prior covariance is not positive-definite");
}

NodePrior NodePrior::weakly_informative(int p, double cstar_scale, double n0, double d0) {
  NodePrior prior;
  prior.m0 = Eigen::VectorXd::Zero(p);
  prior.Cstar0 = cstar_scale * Eigen::MatrixXd::Identity(p, p);
  prior.n0 = n0;
  prior.d0 = d0;
  return prior;
}

FilterState FilterState::from_prior(const NodePrior& prior) {
  prior.validate();
  FilterState s;
  s.t = 0;
  s.m = prior.m0;
  s.Cstar = prior.Cstar0;
  s.n = prior.n0;
  s.d = prior.d0;
  return s;
}

RegressionDesign::RegressionDesign(Eigen::MatrixXd rows, int first_time) : rows_(std::move(rows)), first_time_(first_time) {
  if (rows_.cols() < 1) throw InvalidArgument("design needs at least the intercept column");
  if (first_time_ < 0) throw InvalidArgument("design first_time must be non-negative");
  for (Eigen::Index t = 0; t < rows_.rows(); ++t)
    if (rows_(t, 0) != 1.0) throw InvalidArgument("design intercept column must be 1 at every step");
}

RegressionDesign RegressionDesign::intercept_only(int T) { return RegressionDesign(Eigen::MatrixXd::Ones(T, 1)); }

RegressionDesign RegressionDesign::from_parents(const TimeSeriesMatrix& data, int node, ParentSet parents, int own_lag) {
  const int n = static_cast<int>(data.cols());
  if (node < 0 || node >= n) throw InvalidArgument("node index out of range");
  if (parents.contains(node)) throw InvalidArgument("a node cannot be its own parent");
  if (n < kMaxNodes && (parents.bits() >> n) != 0) throw InvalidArgument("parent index out of range");
  if (own_lag != 0 && own_lag != 1) throw InvalidArgument("only lag 1 augmentation is supported");
  const int T = static_cast<int>(data.rows()) - own_lag;
  if (T < 1) throw InvalidArgument("series too short for the requested design");
  const auto members = parents.members();
  const int p = 1 + static_cast<int>(members.size()) + own_lag;
  Eigen::MatrixXd rows(T, p);
  rows.col(0).setOnes();
  for (std::size_t k = 0; k < members.size(); ++k)
    rows.col(1 + static_cast<Eigen::Index>(k)) = data.col(members[k]).segment(own_lag, T);
  if (own_lag == 1) rows.col(p - 1) = data.col(node).head(T);
  return RegressionDesign(std::move(rows), own_lag);
}

Eigen::VectorXd response(const TimeSeriesMatrix& data, int node, int own_lag) {
  if (node < 0 || node >= data.cols()) throw InvalidArgument("node index out of range");
  return data.col(node).segment(own_lag, data.rows() - own_lag);
}

double student_t_log_density(double y, double dof, double f, double Q) {
  if (!(Q > 0.0)) throw InvalidArgument("Student-t scale must be positive");
  if (!(dof > 0.0)) throw InvalidArgument("Student-t degrees of freedom must be positive");
  const double z = (y - f) * (y - f) / (dof * Q);
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi * Q) -
         0.5 * (dof + 1.0) * std::log1p(z);
}

double log_predictive_density(const PredictiveSummary& pred, double y) {
  return student_t_log_density(y, pred.dof, pred.f, pred.Q);
}

std::pair<FilterState, PredictiveSummary> filter_step(const FilterState& state, double y, const Eigen::VectorXd& F,
                                                      double delta, double prior_inflation, double obs_scale) {
  check_delta(delta);
  if (F.size() != state.dimension()) throw InvalidArgument("covariate length does not match state dimension");
  if (!std::isfinite(y) || !F.allFinite()) throw InvalidArgument("non-finite observation or covariate");
  if (!(prior_inflation > 0.0) || !(obs_scale > 0.0)) throw InvalidArgument("scale factors must be positive");

  const Eigen::MatrixXd R = state.Cstar * (prior_inflation / delta);
  const Eigen::VectorXd RF = R * F;
  const double Qstar = F.dot(RF) + obs_scale;
  if (!(Qstar > 0.0) || !std::isfinite(Qstar)) throw NumericalError("forecast variance broke down (Q* <= 0)");

  PredictiveSummary pred;
  pred.f = F.dot(state.m);
  pred.Qstar = Qstar;
  pred.Q = Qstar * state.S();
  pred.dof = state.n;
  pred.e = y - pred.f;
  pred.log_density = student_t_log_density(y, pred.dof, pred.f, pred.Q);

  FilterState next;
  next.t = state.t + 1;
  const Eigen::VectorXd A = RF / Qstar;
  next.m = state.m + A * pred.e;
  next.Cstar = R - A * A.transpose() * Qstar;
  next.Cstar = 0.5 * (next.Cstar + next.Cstar.transpose()).eval();
  next.n = state.n + 1.0;
  next.d = state.d + pred.e * pred.e / Qstar;
  return {std::move(next), pred};
}

FilterRun filter_series(std::span<const double> y, const RegressionDesign& design, double delta, const NodePrior& prior,
                        const FilterOptions& options) {
  check_delta(delta);
  const int T = static_cast<int>(y.size());
  if (T == 0) throw InvalidArgument("empty series");
  if (design.length() != T) throw InvalidArgument("design length does not match series length");
  if (design.dimension() != prior.dimension()) throw InvalidArgument("design dimension does not match prior dimension");
  if (!(options.inflation > 0.0)) throw InvalidArgument("inflation must be positive");

  std::vector<char> inflate(T, 0);
  for (int t : options.inflate_at) {
    if (t < 0 || t >= T) throw InvalidArgument("change point outside the series");
    inflate[t] = 1;
  }

  FilterRun run;
  run.delta = delta;
  run.initial = FilterState::from_prior(prior);
  run.states.reserve(T);
  run.predictives.reserve(T);
  run.prior_scale.reserve(T);

  const FilterState* current = &run.initial;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd F = design.row(t);
    const double inflation = inflate[t] ? options.inflation : 1.0;
    double obs_scale = 1.0;
    if (options.variance_power != 0.0) {
      // Law evaluated at the forecast's expected squared level so a vague
      // prior does not collapse the first observation variance.
      const double mu = F.dot(current->m);
      const double spread = current->S() * (inflation / delta) * F.dot(current->Cstar * F);
      obs_scale = std::max(std::pow(mu * mu + spread, 0.5 * options.variance_power), options.variance_floor);
    }
    auto [next, pred] = filter_step(*current, y[t], F, delta, inflation, obs_scale);
    run.lpl += pred.log_density;
    run.predictives.push_back(pred);
    run.prior_scale.push_back(inflation / delta);
    run.states.push_back(std::move(next));
    current = &run.states.back();
  }
  return run;
}

FilterRun filter_series(const Eigen::VectorXd& y, const RegressionDesign& design, double delta, const NodePrior& prior,
                        const FilterOptions& options) {
  return filter_series(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), design, delta, prior,
                       options);
}

namespace {

// Fast scalar recursion. P > 0 fixes the dimension at compile time so the
// small inner loops unroll; P = 0 reads it from `dim`.
template <int P>
double lpl_kernel(const double* y, int T, const Eigen::MatrixXd& X, double delta, const NodePrior& prior, int dim) {
  const int p = P > 0 ? P : dim;
  std::array<double, kMaxFastDim> m{}, F{}, RF{};
  std::array<double, kMaxFastDim * kMaxFastDim> C{};
  for (int i = 0; i < p; ++i) {
    m[i] = prior.m0[i];
    for (int j = 0; j < p; ++j) C[i * p + j] = prior.Cstar0(i, j);
  }
  double n = prior.n0;
  double d = prior.d0;
  const double inv_delta = 1.0 / delta;
  const double* tconst = t_constants(prior.n0, T);
  const double* xdata = X.data();
  double lpl = 0.0;

  for (int t = 0; t < T; ++t) {
    if (!std::isfinite(y[t])) throw InvalidArgument("non-finite observation");
    for (int i = 0; i < p; ++i) F[i] = xdata[static_cast<std::size_t>(i) * T + t];
    double f = 0.0;
    for (int i = 0; i < p; ++i) f += F[i] * m[i];
    double quad = 0.0;
    for (int i = 0; i < p; ++i) {
      double acc = 0.0;
      for (int j = 0; j < p; ++j) acc += C[i * p + j] * F[j];
      RF[i] = acc * inv_delta;
      quad += F[i] * RF[i];
    }
    const double Qstar = quad + 1.0;
    if (!(Qstar > 0.0) || !std::isfinite(Qstar)) throw NumericalError("forecast variance broke down (Q* <= 0)");
    const double e = y[t] - f;
    const double Q = Qstar * (d / n);
    lpl += tconst[t] - 0.5 * std::log(Q) - 0.5 * (n + 1.0) * std::log1p(e * e / (n * Q));

    // C* <- R* - RF RF' / Q*, with R* = C*/delta. C* stays exactly symmetric
    // because both triangles are written from the same value.
    const double inv_q = 1.0 / Qstar;
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) {
        const double v = C[i * p + j] * inv_delta - RF[i] * RF[j] * inv_q;
        C[i * p + j] = v;
        C[j * p + i] = v;
      }
      m[i] += RF[i] * inv_q * e;
    }
    n += 1.0;
    d += e * e * inv_q;
  }
  return lpl;
}

}  // namespace

double log_predictive_likelihood(std::span<const double> y, const RegressionDesign& design, double delta,
                                 const NodePrior& prior) {
  check_delta(delta);
  const int T = static_cast<int>(y.size());
  const int p = design.dimension();
  if (T == 0) throw InvalidArgument("empty series");
  if (design.length() != T) throw InvalidArgument("design length does not match series length");
  if (p != prior.dimension()) throw InvalidArgument("design dimension does not match prior dimension");
  if (p > kMaxFastDim) throw InvalidArgument("design dimension too large");
  const Eigen::MatrixXd& X = design.rows();
  switch (p) {
    case 1: return lpl_kernel<1>(y.data(), T, X, delta, prior, p);
    case 2: return lpl_kernel<2>(y.data(), T, X, delta, prior, p);
    case 3: return lpl_kernel<3>(y.data(), T, X, delta, prior, p);
    case 4: return lpl_kernel<4>(y.data(), T, X, delta, prior, p);
    case 5: return lpl_kernel<5>(y.data(), T, X, delta, prior, p);
    case 6: return lpl_kernel<6>(y.data(), T, X, delta, prior, p);
    case 7: return lpl_kernel<7>(y.data(), T, X, delta, prior, p);
    case 8: return lpl_kernel<8>(y.data(), T, X, delta, prior, p);
    case 9: return lpl_kernel<9>(y.data(), T, X, delta, prior, p);
    case 10: return lpl_kernel<10>(y.data(), T, X, delta, prior, p);
    case 11: return lpl_kernel<11>(y.data(), T, X, delta, prior, p);
    case 12: return lpl_kernel<12>(y.data(), T, X, delta, prior, p);
    default: return lpl_kernel<0>(y.data(), T, X, delta, prior, p);
  }
}

SmoothedTrajectory smooth(const FilterRun& run, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("interval level must lie in (0, 1)");
  const int T = run.length();
  if (T == 0 || static_cast<int>(run.states.size()) != T) throw InvalidArgument("filter run has no retained states");
  const int p = run.states.back().dimension();
  const FilterState& last = run.states.back();

  SmoothedTrajectory out;
  out.level = level;
  out.dof = last.n;
  out.means.resize(T, p);
  out.scales.resize(T, p);

  // With G = I and R*_{t+1} = s_{t+1} C*_t the smoothing gain is I / s_{t+1}.
  Eigen::VectorXd a = last.m;
  Eigen::MatrixXd R = last.Cstar;
  out.means.row(T - 1) = a.transpose();
  out.scales.row(T - 1) = R.diagonal().transpose();
  for (int t = T - 2; t >= 0; --t) {
    const double b = 1.0 / run.prior_scale[t + 1];
    const FilterState& s = run.states[t];
    a = s.m + b * (a - s.m);
    R = (1.0 - b) * s.Cstar + b * b * R;
    out.means.row(t) = a.transpose();
    out.scales.row(t) = R.diagonal().transpose();
  }
  out.scales = (out.scales.array().max(0.0) * last.S()).sqrt().matrix();

  const boost::math::students_t dist(out.dof);
  const double k = boost::math::quantile(dist, 0.5 * (1.0 + level));
  out.hpd_lo = out.means - k * out.scales;
  out.hpd_hi = out.means + k * out.scales;
  return out;
}

}  // namespace mdm
