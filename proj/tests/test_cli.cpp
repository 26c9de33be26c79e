#include "doctest.h"

#include "cli.hpp"
#include "mdmnet/csv_io.hpp"
#include "mdmnet/synthgen.hpp"
#include "support/generators.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace mdm;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run mdmnet(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"mdmnet"};
  owned.insert(owned.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("mdmnet_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& f) const { return (path_ / f).string(); }

 private:
  fs::path path_;
};

int count_csv(const std::string& dir) {
  int k = 0;
  for (const auto& e : fs::directory_iterator(dir)) k += e.path().extension() == ".csv";
  return k;
}

Json load_json(const std::string& path) { return Json::parse(read_text_file(path)); }

}  // namespace

TEST_CASE("simulate presets") {
  TempDir tmp("simulate");
  Run r = mdmnet({"-q", "simulate", "--preset", "appendix-b", "--T", "300", "--wstar", "0.01", "--seed", "1",
                  "--out", tmp / "b"});
  REQUIRE(r.code == cli::kOk);
  CHECK(count_csv(tmp / "b") == 100);
  const Json m = load_json(tmp / "b/manifest.json");
  CHECK(m["reps"] == 100);
  CHECK(m["seed"] == 1);
  CHECK(read_csv_file(tmp / "b/rep100.csv").data.rows() == 300);

  r = mdmnet({"-q", "simulate", "--preset", "appendix-a", "--seed", "1", "--out", tmp / "a"});
  REQUIRE(r.code == cli::kOk);
  CHECK(count_csv(tmp / "a") == 50);
  const CsvTable t = read_csv_file(tmp / "a/rep001.csv");
  CHECK(t.data.rows() == 230);
  CHECK(t.data.cols() == 11);
  CHECK(t.data == gen_appendix_a(1)[0].data);

  r = mdmnet({"-q", "simulate", "--preset", "appendix-a", "--seed", "1", "--out", tmp / "a2"});
  CHECK(read_text_file(tmp / "a/rep017.csv") == read_text_file(tmp / "a2/rep017.csv"));
  CHECK(read_text_file(tmp / "a/manifest.json") == read_text_file(tmp / "a2/manifest.json"));

  r = mdmnet({"simulate", "--preset", "sim22", "--out", tmp / "x"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("sim22") != std::string::npos);
  CHECK(mdmnet({"frobnicate"}).code == cli::kUsage);
  CHECK(mdmnet({"--help"}).code == cli::kOk);
}

TEST_CASE("score command") {
  TempDir tmp("score");
  write_csv_file(tmp / "d.csv", gen_appendix_b(100, 0.001, 3)[0].data);
  REQUIRE(mdmnet({"-q", "score", "--data", tmp / "d.csv", "--out", tmp / "s1.txt"}).code == cli::kOk);
  REQUIRE(mdmnet({"-q", "score", "--data", tmp / "d.csv", "--out", tmp / "s2.txt"}).code == cli::kOk);
  const std::string s = read_text_file(tmp / "s1.txt");
  CHECK(s == read_text_file(tmp / "s2.txt"));
  int entries = 0;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) entries += line.find("delta=") != std::string::npos;
  CHECK(entries == 12);

  const Run logged = mdmnet({"score", "--data", tmp / "d.csv"});
  CHECK(logged.out == s);
  CHECK(logged.err.find("node 3:") != std::string::npos);

  write_text_file(tmp / "bad.csv", "node1,node2\n1,2\n3,abc\n");
  const Run bad = mdmnet({"score", "--data", tmp / "bad.csv"});
  CHECK(bad.code == cli::kParse);
  CHECK(bad.err.find("line 3, column 2") != std::string::npos);

  write_csv_file(tmp / "wide.csv", TimeSeriesMatrix::Random(40, 15));
  const Run wide = mdmnet({"score", "--data", tmp / "wide.csv"});
  CHECK(wide.code == cli::kResource);
  CHECK(wide.err.find("max_parents") != std::string::npos);
}

TEST_CASE("search command") {
  TempDir tmp("search");
  write_csv_file(tmp / "a.csv", gen_appendix_a(5)[0].data);
  REQUIRE(mdmnet({"-q", "score", "--data", tmp / "a.csv", "--out", tmp / "a.scores"}).code == cli::kOk);
  const Run r = mdmnet({"-q", "search", "--scores", tmp / "a.scores", "--engine", "both", "--out", tmp / "g"});
  REQUIRE(r.code == cli::kOk);
  const Json j = load_json(tmp / "g.json");
  CHECK(j["acyclic"] == true);
  CHECK(j["proven_optimal"] == true);
  CHECK(j["score"].get<double>() == j["oracle"]["score"].get<double>());
  CHECK(j["best_delta"].size() == 11);
  CHECK(j["telemetry"]["lp_solves"].get<long>() >= 1);
  CHECK(read_text_file(tmp / "g.edges") == r.out);
  CHECK(read_text_file(tmp / "g.dot").rfind("digraph", 0) == 0);

  write_text_file(tmp / "empty.scores", "");
  CHECK(mdmnet({"search", "--scores", tmp / "empty.scores"}).code == cli::kParse);
  write_text_file(tmp / "broken.scores", "2\n1 1\n-3.0 0 delta=1\n2 1\n-2.0 zero delta=1\n");
  CHECK(mdmnet({"search", "--scores", tmp / "broken.scores"}).code == cli::kParse);
  CHECK(mdmnet({"search", "--scores", tmp / "a.scores", "--engine", "greedy"}).code == cli::kUsage);
}

TEST_CASE("diagnose command") {
  TempDir tmp("diagnose");
  write_csv_file(tmp / "ar.csv", testgen::ar1(200, 0.6, 1.0, 21));
  write_text_file(tmp / "none.edges", "");
  const Run r = mdmnet({"-q", "diagnose", "--data", tmp / "ar.csv", "--dag", tmp / "none.edges", "--out", tmp / "d",
                        "--embellish", "lag1"});
  REQUIRE(r.code == cli::kOk);
  const Json rep = load_json(tmp / "d/report.json");
  CHECK(rep["embellishment"]["lpl_delta"].get<double>() > 0.0);
  CHECK(rep["embellishment"]["steps"][0]["accepted"] == true);
  const auto& flags = rep["nodes"][0]["flags"];
  CHECK(std::find(flags.begin(), flags.end(), "autocorrelation") != flags.end());
  CHECK(fs::exists(tmp / "d/node1_errors.csv"));
  CHECK(fs::exists(tmp / "d/node1_acf.csv"));
  CHECK(fs::exists(tmp / "d/embellished_bf.csv"));

  write_csv_file(tmp / "wn.csv", testgen::ar1(300, 0.0, 1.0, 22));
  REQUIRE(mdmnet({"-q", "diagnose", "--data", tmp / "wn.csv", "--dag", tmp / "none.edges", "--out", tmp / "w"}).code ==
          cli::kOk);
  CHECK(load_json(tmp / "w/report.json")["nodes"][0]["flags"].empty());

  // Config defaults apply unless a flag overrides them.
  write_text_file(tmp / "c.toml", "[diagnose]\nthreshold = 0.0\n");
  REQUIRE(mdmnet({"-q", "--config", tmp / "c.toml", "diagnose", "--data", tmp / "ar.csv", "--dag", tmp / "none.edges",
                  "--out", tmp / "c"})
              .code == cli::kOk);
  CHECK(load_json(tmp / "c/report.json")["nodes"][0]["change_points"].empty());

  CHECK(mdmnet({"diagnose", "--data", tmp / "ar.csv", "--dag", tmp / "none.edges", "--out", tmp / "e", "--node", "2"})
            .code == cli::kUsage);
  write_text_file(tmp / "cycle.edges", "1 -> 1\n");
  CHECK(mdmnet({"diagnose", "--data", tmp / "ar.csv", "--dag", tmp / "cycle.edges", "--out", tmp / "e"}).code ==
        cli::kParse);
}

TEST_CASE("evaluate command") {
  TempDir tmp("evaluate");
  write_text_file(tmp / "truth.edges", "1 -> 2\n2 -> 3\n");
  write_text_file(tmp / "est.edges", "2 -> 1\n1 -> 3\n");
  const Run single = mdmnet({"evaluate", "--truth", tmp / "truth.edges", "--nodes", "3", "--estimates",
                             tmp / "est.edges", "--out", tmp / "r"});
  REQUIRE(single.code == cli::kOk);
  const Json s = load_json(tmp / "r_summary.json");
  CHECK(s["metrics"]["sensitivity"]["mean"].get<double>() == doctest::Approx(0.5));
  CHECK(s["metrics"]["d_accuracy"]["mean"].get<double>() == 0.0);
  CHECK(s["metrics"]["sensitivity"]["standard_error"].is_null());
  CHECK(read_text_file(tmp / "r_replications.csv").find("1,est.edges,1,1,0,1,") != std::string::npos);

  std::vector<std::string> files;
  for (int k = 0; k < 15; ++k) {
    const std::string f = tmp / ("s" + std::to_string(k) + ".edges");
    write_text_file(f, k < 14 ? "1 -> 2\n3 -> 4\n" : "4 -> 1\n");
    files.push_back(f);
  }
  std::vector<std::string> args{"evaluate", "--group", "--nodes", "4", "--out", tmp / "g", "--estimates"};
  args.insert(args.end(), files.begin(), files.end());
  std::vector<const char*> argv{"mdmnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  REQUIRE(cli::run(static_cast<int>(argv.size()), argv.data(), out, err) == cli::kOk);
  const Json g = load_json(tmp / "g_summary.json");
  CHECK(g["subjects"] == 15);
  CHECK(g["significant"].size() == 2);
  CHECK(fs::exists(tmp / "g_prevalence.csv"));
  CHECK(fs::exists(tmp / "g_mask.csv"));

  write_text_file(tmp / "four.json", R"({"n": 4, "edges": [[1, 2]]})");
  CHECK(mdmnet({"evaluate", "--truth", tmp / "truth.edges", "--nodes", "3", "--estimates", tmp / "four.json"}).code ==
        cli::kUsage);
  CHECK(mdmnet({"evaluate", "--estimates", tmp / "est.edges", "--nodes", "3"}).code == cli::kUsage);
}
