#include "mdmnet/csv_io.hpp"
#include "mdmnet/diagnostics.hpp"
#include "mdmnet/error.hpp"
#include "mdmnet/metrics.hpp"
#include "mdmnet/scores.hpp"
#include "mdmnet/search.hpp"
#include "mdmnet/synthgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mdm;

namespace {

std::vector<int> one_based(ParentSet s) {
  std::vector<int> out;
  for (int v : s.members()) out.push_back(v + 1);
  return out;
}

ParentSet from_one_based(const std::vector<int>& nodes) {
  ParentSet s;
  for (int v : nodes) {
    if (v < 1 || v > kMaxNodes) throw InvalidArgument("node label out of range");
    s = s.with(v - 1);
  }
  return s;
}

ScoreConfig make_config(double delta_start, double delta_end, double delta_step, std::optional<int> max_parents,
                        bool prune, int threads) {
  ScoreConfig cfg;
  cfg.grid = {delta_start, delta_end, delta_step};
  cfg.max_parents = max_parents;
  cfg.prune = prune;
  cfg.threads = threads;
  return cfg;
}

py::dict search_dict(const SearchResult& r) {
  py::dict d;
  d["dag"] = r.dag;
  d["score"] = r.score;
  d["best_delta"] = r.best_delta;
  d["status"] = std::string(to_string(r.status));
  d["proven_optimal"] = r.proven_optimal();
  d["upper_bound"] = r.upper_bound;
  const auto& t = r.telemetry;
  py::dict tel;
  tel["lp_solves"] = t.lp_solves;
  tel["simplex_iterations"] = t.simplex_iterations;
  tel["cuts_added"] = t.cuts_added;
  tel["cut_rounds"] = t.cut_rounds;
  tel["branch_nodes"] = t.branch_nodes;
  tel["seconds"] = t.seconds;
  tel["root_bounds"] = t.root_bounds;
  d["telemetry"] = tel;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mdmnet, m) {
  m.doc() = "Multiregression dynamic model structure learning";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Dag>(m, "Dag")
      .def(py::init<int>(), py::arg("n"))
      .def_static(
          "from_edges",
          [](int n, const std::vector<std::pair<int, int>>& edges) {
            std::vector<std::pair<int, int>> e;
            for (auto [a, b] : edges) e.emplace_back(a - 1, b - 1);
            return Dag::from_edges(n, e);
          },
          py::arg("n"), py::arg("edges"), "Graph from 1-based (from, to) pairs.")
      .def_property_readonly("n", &Dag::size)
      .def_property_readonly("edges",
                             [](const Dag& d) {
                               std::vector<std::pair<int, int>> e;
                               for (auto [a, b] : d.edges()) e.emplace_back(a + 1, b + 1);
                               return e;
                             })
      .def("parents", [](const Dag& d, int node) { return one_based(d.parents(node - 1)); }, py::arg("node"))
      .def("is_acyclic", &Dag::is_acyclic)
      .def("adjacency", &Dag::adjacency)
      .def("to_edge_list", [](const Dag& d) { return to_edge_list(d); })
      .def("to_dot", [](const Dag& d) { return to_dot(d); })
      .def(py::self == py::self)
      .def("__repr__", [](const Dag& d) { return "<Dag n=" + std::to_string(d.size()) + " edges=" +
                                                 std::to_string(d.edge_count()) + ">"; });

  py::class_<ScoreTable>(m, "ScoreTable")
      .def_property_readonly("n", &ScoreTable::node_count)
      .def("__len__", &ScoreTable::total_entries)
      .def(
          "entries",
          [](const ScoreTable& t, int node) {
            py::list out;
            for (const auto& e : t.entries(node - 1)) out.append(py::make_tuple(one_based(e.parents), e.score, e.delta));
            return out;
          },
          py::arg("node"), "(parents, score, delta) tuples for a 1-based node.")
      .def(
          "score",
          [](const ScoreTable& t, int node, const std::vector<int>& parents) {
            const ScoreEntry* e = t.find(node - 1, from_one_based(parents));
            if (!e) throw InvalidArgument("parent set not in the table");
            return e->score;
          },
          py::arg("node"), py::arg("parents"))
      .def("pruned", [](const ScoreTable& t) { return prune_score_table(t); })
      .def("dumps",
           [](const ScoreTable& t) {
             std::ostringstream o;
             write_scores(o, t);
             return o.str();
           })
      .def_static("loads",
                  [](const std::string& s) {
                    std::istringstream in(s);
                    return read_scores(in);
                  })
      .def(py::self == py::self);

  m.def(
      "score_table",
      [](const Eigen::MatrixXd& data, double delta_start, double delta_end, double delta_step,
         std::optional<int> max_parents, bool prune, int threads) {
        py::gil_scoped_release release;
        return compute_score_table(data, make_config(delta_start, delta_end, delta_step, max_parents, prune, threads));
      },
      py::arg("data"), py::arg("delta_start") = 0.5, py::arg("delta_end") = 1.0, py::arg("delta_step") = 0.01,
      py::arg("max_parents") = py::none(), py::arg("prune") = false, py::arg("threads") = 0,
      "Local scores of every node and parent set for a T x n array.");

  m.def(
      "node_score",
      [](const Eigen::MatrixXd& data, int node, const std::vector<int>& parents) {
        const LocalScore s = node_best_score(data, node - 1, from_one_based(parents), ScoreConfig{});
        return py::make_tuple(s.score, s.delta);
      },
      py::arg("data"), py::arg("node"), py::arg("parents"), "(score, best discount) of one node.");

  m.def(
      "dp_search", [](const ScoreTable& t) { return search_dict(dp_exact_search(t)); }, py::arg("table"));
  m.def(
      "ip_search",
      [](const ScoreTable& t, double time_limit, long node_limit, bool prune) {
        IpOptions o;
        o.time_limit_seconds = time_limit;
        o.max_branch_nodes = node_limit;
        o.prune = prune;
        SearchResult r;
        {
          py::gil_scoped_release release;
          r = ip_search(t, o);
        }
        return search_dict(r);
      },
      py::arg("table"), py::arg("time_limit") = 600.0, py::arg("node_limit") = 1000000, py::arg("prune") = true);

  m.def(
      "appendix_a", [](std::uint64_t seed) {
        std::vector<Eigen::MatrixXd> out;
        for (auto& r : gen_appendix_a(seed)) out.push_back(std::move(r.data));
        return out;
      },
      py::arg("seed") = 1, "50 replications of the 11-node network, each 230 x 11.");
  m.def(
      "appendix_b",
      [](int T, double wstar, std::uint64_t seed) {
        std::vector<Eigen::MatrixXd> out;
        for (auto& r : gen_appendix_b(T, wstar, seed)) out.push_back(std::move(r.data));
        return out;
      },
      py::arg("T") = 100, py::arg("wstar") = 0.001, py::arg("seed") = 1, "100 replications of the 3-node chain.");
  m.def("appendix_a_dag", [] { return appendix_a_spec(1).dag; });
  m.def("appendix_b_dag", [] { return appendix_b_spec(100, 0.0, 1).dag; });

  m.def(
      "c_sensitivity",
      [](const Dag& truth, const Dag& est) {
        const ConfusionCounts c = confusion(truth, est);
        const CSensitivity s = c_sensitivity(c);
        py::dict d;
        d["tp"] = c.tp;
        d["fp"] = c.fp;
        d["tn"] = c.tn;
        d["fn"] = c.fn;
        d["sensitivity"] = s.sensitivity;
        d["specificity"] = s.specificity;
        d["ppv"] = s.ppv;
        d["npv"] = s.npv;
        d["success_rate"] = s.success_rate;
        return d;
      },
      py::arg("truth"), py::arg("estimate"));
  m.def("d_accuracy", &d_accuracy, py::arg("truth"), py::arg("estimate"));
  m.def(
      "group_prevalence",
      [](const std::vector<Dag>& dags, double alpha) {
        const GroupPrevalence g = group_prevalence(dags);
        py::dict d;
        d["phat"] = g.phat;
        d["pi"] = g.pi;
        d["p_values"] = prevalence_p_values(g);
        d["significant"] = Eigen::MatrixXi(fdr_significant(g, alpha).cast<int>());
        return d;
      },
      py::arg("dags"), py::arg("alpha") = 0.05);

  m.def(
      "node_monitor",
      [](const Eigen::MatrixXd& data, int node, const std::vector<int>& parents, int own_lag) {
        NodeModel model;
        model.parents = from_one_based(parents);
        model.own_lag = own_lag;
        const NodeFit fit = fit_node(data, node - 1, model);
        const MonitorReport rep = node_monitor(fit.run);
        py::dict d;
        d["lpl"] = fit.lpl;
        d["delta"] = fit.run.delta;
        d["std_errors"] = rep.std_errors;
        d["acf"] = rep.acf;
        d["acf_band"] = rep.acf_band;
        d["skewness"] = rep.skewness;
        d["excess_kurtosis"] = rep.excess_kurtosis;
        d["drift_statistic"] = rep.drift_statistic;
        d["variance_ratio_p"] = rep.variance_ratio_p;
        std::vector<std::string> flags;
        for (MonitorFlag f : rep.flags) flags.emplace_back(to_string(f));
        d["flags"] = flags;
        return d;
      },
      py::arg("data"), py::arg("node"), py::arg("parents") = std::vector<int>{}, py::arg("own_lag") = 0);
  m.def(
      "change_points",
      [](const Eigen::MatrixXd& data, const Dag& dag, int node, double threshold) {
        ChangePointOptions o;
        o.threshold = threshold;
        std::vector<int> out;
        for (int t : detect_change_points(data, ModelSpec::from_dag(dag), node - 1, o)) out.push_back(t + 1);
        return out;
      },
      py::arg("data"), py::arg("dag"), py::arg("node"), py::arg("threshold") = 0.3,
      "1-based times where the node's Bayes factor monitor fires.");

  m.def(
      "read_csv",
      [](const std::string& path) {
        CsvTable t = read_csv_file(path);
        return py::make_tuple(t.header, t.data);
      },
      py::arg("path"));
  m.def(
      "write_csv", [](const std::string& path, const Eigen::MatrixXd& data) { write_csv_file(path, data); },
      py::arg("path"), py::arg("data"));
}
