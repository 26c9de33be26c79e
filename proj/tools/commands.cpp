#include "commands.hpp"

#include "mdmnet/csv_io.hpp"
#include "mdmnet/diagnostics.hpp"
#include "mdmnet/error.hpp"
#include "mdmnet/metrics.hpp"
#include "mdmnet/scores.hpp"
#include "mdmnet/search.hpp"
#include "mdmnet/synthgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mdm::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json edges_json(const Dag& dag) {
  Json e = Json::array();
  for (const auto& [i, j] : dag.edges()) e.push_back({i + 1, j + 1});
  return e;
}

Json parents_json(const Dag& dag) {
  Json p = Json::array();
  for (int r = 0; r < dag.size(); ++r) {
    Json s = Json::array();
    for (int v : dag.parents(r).members()) s.push_back(v + 1);
    p.push_back(s);
  }
  return p;
}

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void log(Context& ctx, const std::string& msg) {
  if (!ctx.quiet) ctx.err << "mdmnet: " << msg << '\n';
}

std::string seconds(double s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3) << s << " s";
  return o.str();
}

DeltaGrid make_grid(double start, double end, double step) {
  DeltaGrid g{start, end, step};
  g.validate();
  return g;
}

std::vector<double> to_vector(const std::vector<double>& v, int from) {
  return std::vector<double>(v.begin() + from, v.end());
}

}  // namespace

Dag load_dag(const std::string& path, std::optional<int> n) {
  const std::string text = read_text_file(path);
  if (fs::path(path).extension() == ".json") {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON in ") + path, 1, static_cast<int>(e.byte));
    }
    try {
      const Json& g = j.contains("dag") ? j.at("dag") : j;
      const int nodes = j.at("n").get<int>();
      if (n && *n != nodes) throw InvalidArgument(path + " has " + std::to_string(nodes) + " nodes, expected " +
                                                  std::to_string(*n));
      std::vector<std::pair<int, int>> edges;
      for (const auto& e : g.at("edges")) {
        const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (a < 1 || a > nodes || b < 1 || b > nodes || a == b) throw InvalidArgument("edge out of range in " + path);
        edges.emplace_back(a - 1, b - 1);
      }
      return Dag::from_edges(nodes, edges);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what(), 1);
    }
  }
  if (!n) throw InvalidArgument("edge list " + path + " needs a node count (--nodes)");
  std::istringstream in(text);
  return read_edge_list(in, *n);
}

void cmd_simulate(const SimulateArgs& a, Context& ctx) {
  GeneratorSpec spec = a.preset == "appendix-a" ? appendix_a_spec(a.seed)
                                                : appendix_b_spec(a.T.value_or(100), a.wstar, a.seed);
  if (a.T) spec.T = *a.T;
  if (a.reps) spec.reps = *a.reps;
  spec.validate();
  ensure_dir(a.out_dir);

  const int width = std::max(3, static_cast<int>(std::to_string(spec.reps).size()));
  Json files = Json::array();
  for (int i = 0; i < spec.reps; ++i) {
    std::ostringstream name;
    name << "rep" << std::setw(width) << std::setfill('0') << i + 1 << ".csv";
    write_csv_file(join(a.out_dir, name.str()), simulate_replication(spec, i).data);
    files.push_back(name.str());
  }
  write_text_file(join(a.out_dir, "truth.edges"), to_edge_list(spec.dag));

  Json m;
  m["generator"] = a.preset;
  m["n"] = spec.node_count();
  m["T"] = spec.T;
  m["reps"] = spec.reps;
  m["seed"] = spec.seed;
  if (a.preset == "appendix-b") m["wstar_level"] = a.wstar;
  m["dag"] = {{"edges", edges_json(spec.dag)}};
  m["V"] = spec.V;
  Json theta = Json::array(), wstar = Json::array();
  for (int r = 0; r < spec.node_count(); ++r) {
    theta.push_back(vector_json(spec.theta0[r]));
    wstar.push_back(vector_json(spec.wstar[r]));
  }
  m["theta0"] = theta;
  m["wstar"] = wstar;
  m["files"] = files;
  write_json(join(a.out_dir, "manifest.json"), m);
  log(ctx, "wrote " + std::to_string(spec.reps) + " replications to " + a.out_dir);
}

void cmd_score(const ScoreArgs& a, Context& ctx) {
  const CsvTable csv = read_csv_file(a.data);
  ScoreConfig cfg;
  cfg.grid = make_grid(a.delta_start, a.delta_end, a.delta_step);
  cfg.n0 = a.n0;
  cfg.d0 = a.d0;
  cfg.cstar_scale = a.cstar;
  cfg.max_parents = a.max_parents;
  cfg.threads = a.threads;
  std::vector<double> node_seconds;
  ScoreTable table = compute_score_table(csv.data, cfg, &node_seconds);
  for (std::size_t r = 0; r < node_seconds.size(); ++r)
    log(ctx, "node " + std::to_string(r + 1) + ": " + seconds(node_seconds[r]));
  if (a.prune) table = prune_score_table(table);
  if (a.out.empty()) {
    write_scores(ctx.out, table);
  } else {
    std::ostringstream s;
    write_scores(s, table);
    write_text_file(a.out, s.str());
    log(ctx, "wrote " + std::to_string(table.total_entries()) + " entries to " + a.out);
  }
}

void cmd_search(const SearchArgs& a, Context& ctx) {
  std::istringstream in(read_text_file(a.scores));
  const ScoreTable table = read_scores(in);

  IpOptions opts;
  opts.time_limit_seconds = a.time_limit;
  opts.max_branch_nodes = a.node_limit;
  opts.prune = !a.no_prune;

  std::optional<SearchResult> ip, dp;
  if (a.engine != "dp") ip = ip_search(table, opts);
  if (a.engine != "ip") dp = dp_exact_search(table);
  const SearchResult& best = ip ? *ip : *dp;
  if (ip) log(ctx, std::string("integer program: ") + to_string(ip->status) + " in " + seconds(ip->telemetry.seconds));

  Json j;
  j["engine"] = a.engine;
  j["n"] = table.node_count();
  j["score"] = best.score;
  j["status"] = to_string(best.status);
  j["proven_optimal"] = best.proven_optimal();
  j["upper_bound"] = best.upper_bound;
  j["acyclic"] = best.dag.is_acyclic();
  j["edges"] = edges_json(best.dag);
  j["parents"] = parents_json(best.dag);
  j["best_delta"] = best.best_delta;
  if (ip) {
    const auto& t = ip->telemetry;
    j["telemetry"] = {{"lp_solves", t.lp_solves},       {"simplex_iterations", t.simplex_iterations},
                      {"cuts_added", t.cuts_added},     {"cut_rounds", t.cut_rounds},
                      {"branch_nodes", t.branch_nodes}, {"max_depth", t.max_depth},
                      {"root_bounds", t.root_bounds}};
  }
  if (ip && dp) {
    const double tol = 1e-9 * std::max(1.0, std::abs(dp->score));
    j["oracle"] = {{"score", dp->score}, {"same_dag", dp->dag == ip->dag}};
    if (!ip->proven_optimal() || std::abs(ip->score - dp->score) > tol) {
      std::ostringstream msg;
      msg << std::setprecision(17) << "engines disagree: integer program " << ip->score << " ("
          << to_string(ip->status) << "), dynamic programming " << dp->score;
      throw EngineMismatch(msg.str());
    }
  }
  if (!best.dag.is_acyclic()) throw NumericalError("search returned a cyclic graph");

  ctx.out << to_edge_list(best.dag);
  if (!a.out_prefix.empty()) {
    write_text_file(a.out_prefix + ".edges", to_edge_list(best.dag));
    write_text_file(a.out_prefix + ".dot", to_dot(best.dag));
    write_json(a.out_prefix + ".json", j);
  }
}

namespace {

Json monitor_json(int node, const NodeFit& fit, const MonitorReport& m, const std::vector<int>& change_points) {
  Json flags = Json::array();
  for (MonitorFlag f : m.flags) flags.push_back(to_string(f));
  std::vector<int> cps;
  for (int t : change_points) cps.push_back(t + 1);
  return {{"node", node + 1},
          {"parents", [&] {
             Json p = Json::array();
             for (int v : fit.model.parents.members()) p.push_back(v + 1);
             return p;
           }()},
          {"delta", fit.run.delta},
          {"lpl", fit.lpl},
          {"flags", flags},
          {"skewness", m.skewness},
          {"excess_kurtosis", m.excess_kurtosis},
          {"drift_statistic", m.drift_statistic},
          {"variance_ratio", m.variance_ratio},
          {"variance_ratio_p", m.variance_ratio_p},
          {"acf_band", m.acf_band},
          {"acf_outside_lags", m.acf_outside},
          {"change_points", cps}};
}

}  // namespace

void cmd_diagnose(const DiagnoseArgs& a, Context& ctx) {
  const CsvTable csv = read_csv_file(a.data);
  const TimeSeriesMatrix& data = csv.data;
  const int n = static_cast<int>(data.cols());
  const int T = static_cast<int>(data.rows());
  const Dag dag = load_dag(a.dag, n);
  if (!dag.is_acyclic()) throw InvalidArgument("graph in " + a.dag + " has a cycle");
  if (a.node < 0 || a.node > n) throw InvalidArgument("node " + std::to_string(a.node) + " out of range 1.." +
                                                      std::to_string(n));
  ScoreConfig cfg;
  cfg.grid = make_grid(a.delta_start, a.delta_end, a.delta_step);
  ChangePointOptions cp;
  cp.threshold = a.threshold;
  cp.refractory = a.refractory;
  cp.burn_in = a.burn_in;
  cp.mode = a.cp_mode == "cumulative" ? ChangePointMode::Cumulative : ChangePointMode::Instantaneous;
  MonitorOptions mo;
  mo.burn_in = a.burn_in;

  std::vector<int> nodes;
  if (a.node > 0) nodes.push_back(a.node - 1);
  else
    for (int r = 0; r < n; ++r) nodes.push_back(r);

  ensure_dir(a.out_dir);
  ModelSpec spec = ModelSpec::from_dag(dag);
  const bool lagged = std::find(a.embellish.begin(), a.embellish.end(), "lag1") != a.embellish.end();
  const int start = lagged ? 1 : 0;
  const ModelFit base = fit_model(data, spec, cfg, start);

  Json report;
  report["n"] = n;
  report["T"] = T;
  report["first_time"] = start + 1;
  report["lpl"] = base.lpl();
  Json node_reports = Json::array();
  for (int r : nodes) {
    const NodeFit& fit = base.nodes[r];
    const MonitorReport m = node_monitor(fit.run, mo);
    const std::vector<int> cps = detect_change_points(data, spec, r, cp, cfg);
    node_reports.push_back(monitor_json(r, fit, m, cps));

    std::vector<double> time, lag;
    for (int k = 0; k < fit.run.length(); ++k) time.push_back(fit.first_time + k + 1);
    for (std::size_t k = 0; k < m.acf.size(); ++k) lag.push_back(static_cast<double>(k));
    std::ostringstream errors, acf;
    write_columns(errors, {"t", "std_error", "cusum"}, {time, m.std_errors, m.cusum});
    write_columns(acf, {"lag", "acf", "band"}, {lag, m.acf, std::vector<double>(m.acf.size(), m.acf_band)});
    write_text_file(join(a.out_dir, "node" + std::to_string(r + 1) + "_errors.csv"), errors.str());
    write_text_file(join(a.out_dir, "node" + std::to_string(r + 1) + "_acf.csv"), acf.str());

    for (int p : spec.nodes[r].parents.members()) {
      const BayesFactorSeries bf = parent_child_monitor(data, spec, r, p, cfg);
      std::vector<double> t;
      for (int s = bf.first_time; s < T; ++s) t.push_back(s + 1);
      std::ostringstream o;
      write_columns(o, {"t", "log_bf", "cumulative"},
                    {t, to_vector(bf.per_step, bf.first_time), to_vector(bf.cumulative, bf.first_time)});
      const std::string name = "monitor_" + std::to_string(p + 1) + "_" + std::to_string(r + 1) + ".csv";
      write_text_file(join(a.out_dir, name), o.str());
      report["parent_child"].push_back({{"parent", p + 1}, {"child", r + 1}, {"log_bf", bf.final_value}});
    }
  }
  report["nodes"] = node_reports;

  if (!a.embellish.empty()) {
    ModelFit current = base;
    Json steps = Json::array();
    for (const std::string& kind : a.embellish) {
      for (int r : nodes) {
        ModelSpec candidate;
        Json detail;
        if (kind == "lag1") {
          if (spec.nodes[r].own_lag == 1) continue;
          candidate = lag_augment(spec, r);
        } else if (kind == "log") {
          if ((data.col(r).array() <= 0.0).any()) {
            steps.push_back({{"embellishment", kind}, {"node", r + 1}, {"skipped", "non-positive observations"}});
            continue;
          }
          candidate = spec;
          candidate.nodes[r].transform = Transform::Log;
        } else if (kind == "changepoints") {
          const std::vector<int> times = detect_change_points(data, spec, r, cp, cfg);
          if (times.empty()) continue;
          std::vector<int> shown;
          for (int t : times) shown.push_back(t + 1);
          detail = shown;
          candidate = apply_change_points(spec, r, times, a.inflation);
        } else {
          candidate = heteroscedastic(spec, r, a.gamma);
        }
        NodeFit fit = fit_node(data, r, candidate.nodes[r], cfg, start);
        const double before = current.nodes[r].lpl;
        const bool accept = fit.lpl > before;
        Json step = {{"embellishment", kind}, {"node", r + 1},       {"lpl_before", before},
                     {"lpl_after", fit.lpl},  {"delta", fit.lpl - before}, {"accepted", accept}};
        if (!detail.is_null()) step["change_points"] = detail;
        steps.push_back(step);
        if (accept) {
          spec = candidate;
          current.nodes[r] = std::move(fit);
        }
      }
    }
    const BayesFactorSeries bf = global_monitor(current, base);
    std::vector<double> t;
    for (int s = bf.first_time; s < T; ++s) t.push_back(s + 1);
    std::ostringstream o;
    write_columns(o, {"t", "log_bf", "cumulative"},
                  {t, to_vector(bf.per_step, bf.first_time), to_vector(bf.cumulative, bf.first_time)});
    write_text_file(join(a.out_dir, "embellished_bf.csv"), o.str());
    report["embellishment"] = {{"steps", steps},
                               {"lpl_before", base.lpl()},
                               {"lpl_after", current.lpl()},
                               {"lpl_delta", current.lpl() - base.lpl()}};
    log(ctx, "embellished LPL change " + std::to_string(current.lpl() - base.lpl()));
  }
  write_json(join(a.out_dir, "report.json"), report);
  ctx.out << report.dump(2) << '\n';
}

namespace {

struct Summary {
  double mean, se;
  int used, skipped;
};

Summary summarize(const std::vector<double>& v) {
  Summary s{};
  s.mean = nan_mean(v, &s.skipped);
  s.used = static_cast<int>(v.size()) - s.skipped;
  if (s.used < 2) {
    s.se = std::nan("");
    return s;
  }
  double ss = 0.0;
  for (double x : v)
    if (!std::isnan(x)) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / (s.used - 1) / s.used);
  return s;
}

Json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"standard_error", s.se}, {"replications", s.used}, {"skipped", s.skipped}};
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream o;
  const auto names = default_header(static_cast<int>(m.cols()));
  o << "from";
  for (const auto& h : names) o << ',' << h;
  o << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    o << "node" << i + 1;
    for (Eigen::Index j = 0; j < m.cols(); ++j) o << ',' << fmt(m(i, j));
    o << '\n';
  }
  return o.str();
}

}  // namespace

void cmd_evaluate(const EvaluateArgs& a, Context& ctx) {
  std::optional<int> n = a.nodes;
  std::optional<Dag> truth;
  if (!a.truth.empty()) {
    truth = load_dag(a.truth, n);
    n = truth->size();
  }
  std::vector<Dag> estimates;
  for (const auto& path : a.estimates) {
    Dag d = load_dag(path, n);
    if (estimates.empty() && !n) n = d.size();
    if (!estimates.empty() && d.size() != estimates.front().size())
      throw InvalidArgument(path + " has " + std::to_string(d.size()) + " nodes, expected " +
                            std::to_string(estimates.front().size()));
    estimates.push_back(std::move(d));
  }

  Json summary;
  if (a.group) {
    const GroupPrevalence g = group_prevalence(estimates);
    const Eigen::MatrixXd p = prevalence_p_values(g);
    const auto mask = fdr_significant(g, a.alpha);
    Json sig = Json::array();
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        if (mask(i, j)) sig.push_back({{"from", i + 1}, {"to", j + 1}, {"prevalence", g.phat(i, j)}, {"p", p(i, j)}});
    summary = {{"mode", "group"}, {"subjects", g.subjects}, {"pi", g.pi}, {"alpha", a.alpha}, {"significant", sig}};
    if (!a.out_prefix.empty()) {
      write_text_file(a.out_prefix + "_prevalence.csv", matrix_csv(g.phat));
      write_text_file(a.out_prefix + "_pvalues.csv", matrix_csv(p));
      write_text_file(a.out_prefix + "_mask.csv", matrix_csv(mask.cast<double>()));
    }
  } else {
    std::ostringstream rows;
    rows << "replication,file,tp,fp,tn,fn,sensitivity,specificity,ppv,npv,success_rate,d_accuracy\n";
    std::vector<std::vector<double>> cols(6);
    for (std::size_t k = 0; k < estimates.size(); ++k) {
      const ConfusionCounts c = confusion(*truth, estimates[k]);
      const CSensitivity s = c_sensitivity(c);
      const double d = d_accuracy(*truth, estimates[k]);
      const double vals[6] = {s.sensitivity, s.specificity, s.ppv, s.npv, s.success_rate, d};
      rows << k + 1 << ',' << fs::path(a.estimates[k]).filename().string() << ',' << c.tp << ',' << c.fp << ','
           << c.tn << ',' << c.fn;
      for (int m = 0; m < 6; ++m) {
        rows << ',' << fmt(vals[m]);
        cols[m].push_back(vals[m]);
      }
      rows << '\n';
    }
    const char* names[6] = {"sensitivity", "specificity", "ppv", "npv", "success_rate", "d_accuracy"};
    Json metrics;
    for (int m = 0; m < 6; ++m) metrics[names[m]] = summary_json(summarize(cols[m]));
    summary = {{"mode", "replications"}, {"replications", estimates.size()}, {"metrics", metrics}};
    if (!a.out_prefix.empty()) write_text_file(a.out_prefix + "_replications.csv", rows.str());
  }
  if (!a.out_prefix.empty()) write_json(a.out_prefix + "_summary.json", summary);
  ctx.out << summary.dump(2) << '\n';
}

}  // namespace mdm::cli
