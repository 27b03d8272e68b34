#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "activegp/cli.hpp"
#include "activegp/io.hpp"

using namespace activegp;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "activegp");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "activegp_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Json small_config(const fs::path& out) {
  return {{"seed", 4},
          {"q", 2},
          {"p", 2},
          {"n_initial", 4},
          {"n_pool", 30},
          {"n_eval", 20},
          {"n_iter", 5},
          {"threshold", "inf"},
          {"strategies", {"vwal", "random"}},
          {"fit", {{"restarts", 2}}},
          {"lhd_sweeps", 100},
          {"oracle", {{"anchors", 30}}},
          {"out", out.string()}};
}

}  // namespace

TEST_CASE("run writes a bundle and replays byte-identically from its manifest") {
  const fs::path dir = fresh_dir("bundle");
  const fs::path cfg = dir / "config.json";
  write_json(cfg.string(), small_config(dir / "a"));
  REQUIRE(run_cli({"run", "--config", cfg.string()}) == 0);

  for (const char* s : {"vwal", "random"}) {
    const LearningCurve c = read_curve_csv((dir / "a" / (std::string("curve_") + s + ".csv")).string());
    REQUIRE(c.rows.size() == 6);
    CHECK(c.rows.front().n_samples == 4);
    CHECK(c.rows.back().n_samples == 9);
    CHECK(c.rows.back().stop_reason == StopReason::Budget);
  }
  const Json manifest = read_json((dir / "a" / "manifest.json").string());
  CHECK(manifest.at("errors").empty());
  CHECK(manifest.at("runs").size() == 2);
  CHECK(manifest.at("config").at("seed") == 4);

  REQUIRE(run_cli({"run", "--manifest", (dir / "a" / "manifest.json").string(), "--out", (dir / "b").string()}) == 0);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    CHECK_MESSAGE(read_text(entry.path().string()) == read_text((dir / "b" / name).string()), name);
  }
  CHECK(read_text((dir / "a" / "oracle.json").string()) == read_text((dir / "b" / "oracle.json").string()));
}

TEST_CASE("compare joins curves on the sample count") {
  const fs::path dir = fresh_dir("compare");
  auto curve = [](StrategyKind s, std::vector<int> ns) {
    LearningCurve c;
    c.strategy = s;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CurveRow r;
      r.iteration = static_cast<int>(i);
      r.n_samples = ns[i];
      r.strategy = s;
      r.mean_mad = 0.5 * ns[i];
      r.max_mad = ns[i];
      r.cv_mse = 0.25;
      c.rows.push_back(r);
    }
    return c;
  };
  write_curve_csv((dir / "v.csv").string(), curve(StrategyKind::VWAL, {3, 4, 5}));
  write_curve_csv((dir / "r.csv").string(), curve(StrategyKind::Random, {3, 4, 5}));
  write_curve_csv((dir / "d.csv").string(), curve(StrategyKind::DOWAL, {3, 4}));

  REQUIRE(run_cli({"compare", (dir / "v.csv").string(), (dir / "r.csv").string(), "--out", dir.string()}) == 0);
  CHECK(read_text((dir / "compare_mean_mad.csv").string()) == "n_samples,vwal,random\n3,1.5,1.5\n4,2,2\n5,2.5,2.5\n");

  CHECK(run_cli({"compare", (dir / "v.csv").string(), (dir / "d.csv").string(), "--out", dir.string()}) == 2);
  REQUIRE(run_cli({"compare", (dir / "v.csv").string(), (dir / "d.csv").string(), "--outer", "--out",
                   dir.string()}) == 0);
  CHECK(read_text((dir / "compare_max_mad.csv").string()) == "n_samples,vwal,dowal\n3,3,3\n4,4,4\n5,5,\n");
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("codes");
  CHECK(run_cli({"run", "--config", (dir / "missing.json").string()}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"run", "--strategies", "vwal,nope"}) == 2);

  Json bad = small_config(dir / "x");
  bad["bogus"] = 1;
  write_json((dir / "bad.json").string(), bad);
  CHECK(run_cli({"run", "--config", (dir / "bad.json").string()}) == 2);

  // One point for a q=2 linear trend cannot be fitted: a runtime failure with a partial bundle.
  Json tiny = small_config(dir / "tiny");
  tiny["n_initial"] = 1;
  write_json((dir / "tiny.json").string(), tiny);
  CHECK(run_cli({"run", "--config", (dir / "tiny.json").string()}) == 3);
  const Json manifest = read_json((dir / "tiny" / "manifest.json").string());
  CHECK(manifest.at("errors").size() == 2);
}

TEST_CASE("design command is deterministic and centres a single point") {
  const fs::path dir = fresh_dir("design");
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  REQUIRE(run_cli({"design", "--n", "11", "--q", "3", "--seed", "9", "--out", a}) == 0);
  REQUIRE(run_cli({"design", "--n", "11", "--q", "3", "--seed", "9", "--out", b}) == 0);
  CHECK(read_text(a) == read_text(b));
  CHECK(read_matrix_csv(a).rows() == 11);

  REQUIRE(run_cli({"design", "--n", "1", "--q", "2", "--out", a}) == 0);
  CHECK(read_matrix_csv(a) == Eigen::MatrixXd::Zero(1, 2));
}
