#include "mdmnet/diagnostics.hpp"

#include "mdmnet/error.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mdm {

ModelSpec ModelSpec::from_dag(const Dag& dag) {
  ModelSpec spec;
  spec.nodes.resize(dag.size());
  for (int r = 0; r < dag.size(); ++r) spec.nodes[r].parents = dag.parents(r);
  return spec;
}

void ModelSpec::validate(int T) const {
  const int n = node_count();
  for (int r = 0; r < n; ++r) {
    const NodeModel& m = nodes[r];
    const std::string where = " (node " + std::to_string(r + 1) + ")";
    if (m.parents.contains(r)) throw InvalidArgument("self parent" + where);
    if (n < kMaxNodes && (m.parents.bits() >> n) != 0) throw InvalidArgument("parent out of range" + where);
    if (m.own_lag != 0 && m.own_lag != 1) throw InvalidArgument("only lag 1 is supported" + where);
    if (!(m.inflation > 0.0)) throw InvalidArgument("inflation must be positive" + where);
    if (!(m.variance_floor > 0.0)) throw InvalidArgument("variance floor must be positive" + where);
    if (m.delta && !(*m.delta > 0.0 && *m.delta <= 1.0)) throw InvalidArgument("discount outside (0, 1]" + where);
    for (int t : m.change_points)
      if (t < m.own_lag || t >= T) throw InvalidArgument("change point outside the scored range" + where);
  }
}

double ModelFit::lpl() const {
  double s = 0.0;
  for (const auto& f : nodes) s += f.lpl;
  return s;
}

NodeFit fit_node(const TimeSeriesMatrix& data, int node, const NodeModel& model, const ScoreConfig& cfg, int start) {
  const int T = static_cast<int>(data.rows());
  if (node < 0 || node >= data.cols()) throw InvalidArgument("node index out of range");
  ModelSpec one;
  one.nodes.assign(data.cols(), NodeModel{});
  one.nodes[node] = model;
  one.validate(T);
  const int first = std::max(start, model.own_lag);
  if (start < 0 || first >= T) throw InvalidArgument("start time outside the series");
  for (int t : model.change_points)
    if (t < first) throw InvalidArgument("change point before the first scored time");

  TimeSeriesMatrix source = data.bottomRows(T - first + model.own_lag);
  if (model.transform == Transform::Log) {
    if ((data.col(node).array() <= 0.0).any()) throw InvalidArgument("log transform needs positive observations");
    source.col(node) = source.col(node).array().log();
  }
  const RegressionDesign design = RegressionDesign::from_parents(source, node, model.parents, model.own_lag);
  const Eigen::VectorXd z = response(source, node, model.own_lag);
  const NodePrior prior = cfg.prior(design.dimension());
  FilterOptions fo;
  fo.inflation = model.inflation;
  fo.variance_power = model.variance_power;
  fo.variance_floor = model.variance_floor;
  for (int t : model.change_points) fo.inflate_at.push_back(t - first);

  NodeFit fit;
  fit.model = model;
  fit.first_time = first;
  if (model.delta) {
    fit.run = filter_series(z, design, *model.delta, prior, fo);
  } else {
    std::optional<FilterRun> best;
    const LocalScore pick = argmax_over_grid(cfg.grid.values(), [&](double d) {
      FilterRun run = filter_series(z, design, d, prior, fo);
      const double v = run.lpl;
      if (!best || v >= best->lpl) best = std::move(run);
      return v;
    });
    (void)pick;
    fit.run = std::move(*best);
  }

  fit.log_density.assign(T, std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < fit.run.length(); ++k) {
    const int t = k + fit.first_time;
    const double v = transformed_log_density(fit.run.predictives[k], data(t, node), model.transform);
    fit.log_density[t] = v;
    fit.lpl += v;
  }
  return fit;
}

ModelFit fit_model(const TimeSeriesMatrix& data, const ModelSpec& spec, const ScoreConfig& cfg, int start) {
  if (spec.node_count() != data.cols()) throw InvalidArgument("model and data differ in node count");
  ModelFit out;
  out.T = static_cast<int>(data.rows());
  for (int r = 0; r < spec.node_count(); ++r) out.nodes.push_back(fit_node(data, r, spec.nodes[r], cfg, start));
  return out;
}

namespace {

BayesFactorSeries make_series(const std::vector<const NodeFit*>& a, const std::vector<const NodeFit*>& b, int T) {
  BayesFactorSeries out;
  out.per_step.assign(T, 0.0);
  out.cumulative.assign(T, 0.0);
  int start = 0;
  for (const auto* f : a) start = std::max(start, f->first_time);
  for (const auto* f : b) start = std::max(start, f->first_time);
  out.first_time = start;
  for (int t = start; t < T; ++t) {
    double h = 0.0;
    for (const auto* f : a) h += f->log_density[t];
    for (const auto* f : b) h -= f->log_density[t];
    out.per_step[t] = h;
  }
  double run = 0.0;
  for (int t = 0; t < T; ++t) out.cumulative[t] = run += out.per_step[t];
  out.final_value = T > 0 ? out.cumulative.back() : 0.0;
  return out;
}

}  // namespace

BayesFactorSeries global_monitor(const ModelFit& a, const ModelFit& b) {
  if (a.T != b.T) throw InvalidArgument("models were fitted to series of different lengths");
  if (a.nodes.size() != b.nodes.size()) throw InvalidArgument("models differ in node count");
  std::vector<const NodeFit*> fa, fb;
  for (std::size_t r = 0; r < a.nodes.size(); ++r) {
    if (a.nodes[r].model == b.nodes[r].model) continue;
    fa.push_back(&a.nodes[r]);
    fb.push_back(&b.nodes[r]);
  }
  return make_series(fa, fb, a.T);
}

BayesFactorSeries parent_child_monitor(const TimeSeriesMatrix& data, const ModelSpec& spec, int node, int parent,
                                       const ScoreConfig& cfg) {
  if (node < 0 || node >= spec.node_count()) throw InvalidArgument("node index out of range");
  const NodeModel& full = spec.nodes[node];
  if (!full.parents.contains(parent)) throw InvalidArgument("monitored node is not a parent");
  NodeModel reduced = full;
  reduced.parents = full.parents.without(parent);
  const NodeFit a = fit_node(data, node, full, cfg);
  const NodeFit b = fit_node(data, node, reduced, cfg);
  return make_series({&a}, {&b}, static_cast<int>(data.rows()));
}

const char* to_string(MonitorFlag f) {
  switch (f) {
    case MonitorFlag::Autocorrelation: return "autocorrelation";
    case MonitorFlag::Drift: return "drift";
    case MonitorFlag::Heteroscedasticity: return "heteroscedasticity";
    case MonitorFlag::NonNormality: return "non-normality";
  }
  return "unknown";
}

bool MonitorReport::has(MonitorFlag f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

namespace {

double sample_variance(const double* x, int n) {
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += x[i];
  mean /= n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (x[i] - mean) * (x[i] - mean);
  return s / (n - 1);
}

}  // namespace

MonitorReport node_monitor(const FilterRun& run, const MonitorOptions& opts) {
  const int T = run.length();
  if (opts.burn_in < 0) throw InvalidArgument("burn-in must be non-negative");
  if (T < opts.burn_in + 20) throw InvalidArgument("node monitor needs at least 20 steps after burn-in");
  MonitorReport rep;
  rep.std_errors.resize(T);
  rep.cusum.resize(T);
  double acc = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto& p = run.predictives[t];
    rep.std_errors[t] = p.e / std::sqrt(p.Q);
    rep.cusum[t] = acc += rep.std_errors[t];
  }

  const std::vector<double> x(rep.std_errors.begin() + opts.burn_in, rep.std_errors.end());
  const int N = static_cast<int>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= N;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, sq = 0.0;
  for (double v : x) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
    sq += v * v;
  }
  m2 /= N;
  m3 /= N;
  m4 /= N;
  rep.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  rep.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  const int L = std::min(20, N / 4);
  rep.acf_band = 2.0 / std::sqrt(static_cast<double>(N));
  rep.acf.assign(L + 1, 0.0);
  rep.acf[0] = 1.0;
  for (int k = 1; k <= L; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < N; ++t) s += (x[t] - mean) * (x[t + k] - mean);
    rep.acf[k] = m2 > 0.0 ? s / (N * m2) : 0.0;
    if (std::abs(rep.acf[k]) > rep.acf_band) rep.acf_outside.push_back(k);
  }
  const double allowed = boost::math::quantile(boost::math::binomial_distribution<double>(L, 0.05), 0.95);
  const bool lag1 = !rep.acf_outside.empty() && rep.acf_outside.front() == 1;
  if (lag1 || static_cast<double>(rep.acf_outside.size()) > allowed) rep.flags.push_back(MonitorFlag::Autocorrelation);

  const double rms = std::sqrt(sq / N);
  double partial = 0.0, peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(partial += v));
  rep.drift_statistic = rms > 0.0 ? peak / (rms * std::sqrt(static_cast<double>(N))) : 0.0;
  if (rep.drift_statistic > opts.drift_threshold) rep.flags.push_back(MonitorFlag::Drift);

  const int third = N / 3;
  const double v_first = sample_variance(x.data(), third);
  const double v_last = sample_variance(x.data() + N - third, third);
  if (v_first > 0.0 && v_last > 0.0) {
    rep.variance_ratio = v_last / v_first;
    const boost::math::fisher_f_distribution<double> F(third - 1, third - 1);
    const double c = boost::math::cdf(F, rep.variance_ratio);
    rep.variance_ratio_p = std::min(1.0, 2.0 * std::min(c, 1.0 - c));
    if (rep.variance_ratio_p < opts.variance_ratio_alpha) rep.flags.push_back(MonitorFlag::Heteroscedasticity);
  }

  if (std::abs(rep.skewness) > opts.skew_limit || std::abs(rep.excess_kurtosis) > opts.kurtosis_limit)
    rep.flags.push_back(MonitorFlag::NonNormality);
  return rep;
}

ModelSpec lag_augment(const ModelSpec& spec, int node, int lag) {
  if (lag != 1) throw InvalidArgument("only lag 1 augmentation is supported");
  if (node < 0 || node >= spec.node_count()) throw InvalidArgument("node index out of range");
  ModelSpec out = spec;
  out.nodes[node].own_lag = lag;
  return out;
}

double transformed_log_density(const PredictiveSummary& z_pred, double y, Transform g) {
  switch (g) {
    case Transform::Identity: return log_predictive_density(z_pred, y);
    case Transform::Log:
      if (!(y > 0.0)) throw InvalidArgument("log transform needs a positive observation");
      return log_predictive_density(z_pred, std::log(y)) - std::log(y);
  }
  throw InvalidArgument("unknown transform");
}

std::vector<int> detect_change_points(const TimeSeriesMatrix& data, const ModelSpec& spec, int node,
                                      const ChangePointOptions& opts, const ScoreConfig& cfg) {
  if (!(opts.threshold >= 0.0)) throw InvalidArgument("change-point threshold must be non-negative");
  if (opts.refractory < 0 || opts.burn_in < 0) throw InvalidArgument("window lengths must be non-negative");
  if (node < 0 || node >= spec.node_count()) throw InvalidArgument("node index out of range");
  std::vector<int> out;
  if (opts.threshold == 0.0) return out;

  const NodeModel& model = spec.nodes[node];
  NodeModel null_model = model;
  null_model.parents = ParentSet{};
  const NodeFit a = fit_node(data, node, model, cfg);
  const NodeFit b = fit_node(data, node, null_model, cfg);
  const double limit = std::log(opts.threshold);
  const int T = static_cast<int>(data.rows());
  double level = 0.0;
  int quiet_until = std::max(a.first_time, b.first_time) + opts.burn_in;
  for (int t = quiet_until; t < T; ++t) {
    if (t < quiet_until) continue;
    const double h = a.log_density[t] - b.log_density[t];
    level = opts.mode == ChangePointMode::Cumulative ? h + std::min(0.0, level) : h;
    if (level < limit) {
      out.push_back(t);
      level = 0.0;
      quiet_until = t + 1 + opts.refractory;
    }
  }
  return out;
}

ModelSpec apply_change_points(const ModelSpec& spec, int node, const std::vector<int>& times, double inflation) {
  if (node < 0 || node >= spec.node_count()) throw InvalidArgument("node index out of range");
  if (!(inflation > 0.0)) throw InvalidArgument("inflation must be positive");
  ModelSpec out = spec;
  auto& cp = out.nodes[node].change_points;
  cp.insert(cp.end(), times.begin(), times.end());
  std::sort(cp.begin(), cp.end());
  cp.erase(std::unique(cp.begin(), cp.end()), cp.end());
  out.nodes[node].inflation = inflation;
  return out;
}

ModelSpec heteroscedastic(const ModelSpec& spec, int node, double gamma, double floor) {
  if (node < 0 || node >= spec.node_count()) throw InvalidArgument("node index out of range");
  if (!(floor > 0.0)) throw InvalidArgument("variance floor must be positive");
  ModelSpec out = spec;
  out.nodes[node].variance_power = gamma;
  out.nodes[node].variance_floor = floor;
  return out;
}

}  // namespace mdm
