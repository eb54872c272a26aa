#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbdt/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"cbdt"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cbdt::cli_main(int(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("generate-data writes benchmark-shaped files plus manifest") {
  TempDir dir("cbdt_cli_gen");
  CHECK(run({"--output", dir.str().c_str(), "--set", "seeds=[1,2]", "--set",
             "dataset.source=ihdp_like", "generate-data"}) == 0);
  CHECK(fs::exists(dir.path / "ihdp_npci_1.csv"));
  CHECK(fs::exists(dir.path / "ihdp_npci_2.csv"));
  CHECK(fs::exists(dir.path / "resolved_config.json"));
  CHECK(fs::exists(dir.path / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest.at("format") == "cbdt-run/1");
  CHECK(manifest.at("files").size() >= 3);
}

TEST_CASE("train is byte-deterministic under a fixed config and seed") {
  TempDir a("cbdt_cli_train_a");
  TempDir b("cbdt_cli_train_b");
  const char* overrides[] = {"dataset.n=300", "booster.num_rounds=8", "seeds=[3]"};
  CHECK(run({"--output", a.str().c_str(), "--set", overrides[0], "--set", overrides[1], "--set",
             overrides[2], "train"}) == 0);
  CHECK(run({"--output", b.str().c_str(), "--set", overrides[0], "--set", overrides[1], "--set",
             overrides[2], "train"}) == 0);
  CHECK(fs::exists(a.path / "model.json"));
  CHECK(fs::exists(a.path / "trace.csv"));
  CHECK(slurp(a.path / "model.json") == slurp(b.path / "model.json"));
}

TEST_CASE("invalid enum values name the field and the allowed values") {
  TempDir dir("cbdt_cli_badenum");
  CHECK(run({"--output", dir.str().c_str(), "--set", "booster.residual_mode=bogus", "--set",
             "dataset.n=200", "--set", "booster.num_rounds=2", "--set", "seeds=[1]", "train"}) ==
        2);
}

TEST_CASE("missing model file for rules is a clean I/O failure") {
  TempDir dir("cbdt_cli_norules");
  CHECK(run({"--output", dir.str().c_str(), "rules", "--model", "/nonexistent/model.json"}) == 3);
}

TEST_CASE("rules command emits the documented artifacts on the step dataset") {
  TempDir dir("cbdt_cli_rules");
  CHECK(run({"--output", dir.str().c_str(), "--set", "dataset.source=step", "--set",
             "dataset.n=1500", "--set", "booster.num_rounds=60", "--set", "seeds=[1]",
             "rules"}) == 0);
  CHECK(fs::exists(dir.path / "rules.txt"));
  CHECK(fs::exists(dir.path / "rules.csv"));
  CHECK(fs::exists(dir.path / "rules.json"));
  const std::string text = slurp(dir.path / "rules.txt");
  CHECK(text.find("IF ") != std::string::npos);
  CHECK(text.find("THEN tau") != std::string::npos);
}

TEST_CASE("benchmark produces a report with tests for two methods") {
  TempDir dir("cbdt_cli_bench");
  CHECK(run({"--output", dir.str().c_str(), "--set", "dataset.n=400", "--set",
             "booster.num_rounds=12", "--set", "baseline.rounds=30", "--set", "seeds=[1,2,3]",
             "--set", "methods=[\"cbdt\",\"x\"]", "--set", "benchmark.timing_repetitions=2",
             "--set", "benchmark.timing_warmup=1", "benchmark"}) == 0);
  CHECK(fs::exists(dir.path / "report.txt"));
  CHECK(fs::exists(dir.path / "report.csv"));
  CHECK(fs::exists(dir.path / "per_seed.csv"));
  CHECK(fs::exists(dir.path / "time_vs_pehe.svg"));
  const std::string rep = slurp(dir.path / "report.txt");
  CHECK(rep.find("cbdt") != std::string::npos);
  CHECK(rep.find("x") != std::string::npos);
  CHECK(rep.find("paired t-tests") != std::string::npos);
}

TEST_CASE("single-seed benchmark omits t-tests with an explanatory note") {
  TempDir dir("cbdt_cli_bench1");
  CHECK(run({"--output", dir.str().c_str(), "--set", "dataset.n=300", "--set",
             "booster.num_rounds=8", "--set", "baseline.rounds=20", "--set", "seeds=[4]",
             "--set", "methods=[\"cbdt\",\"s\"]", "benchmark"}) == 0);
  const std::string rep = slurp(dir.path / "report.txt");
  CHECK(rep.find("omitted") != std::string::npos);
}

TEST_CASE("unknown method names fail validation") {
  TempDir dir("cbdt_cli_badmethod");
  CHECK(run({"--output", dir.str().c_str(), "--set", "methods=[\"cbdt\",\"bogus\"]",
             "benchmark"}) == 2);
}

TEST_CASE("ablation always reports the three component rows") {
  TempDir dir("cbdt_cli_ablate");
  CHECK(run({"--output", dir.str().c_str(), "--set", "dataset.n=300", "--set",
             "booster.num_rounds=10", "--set", "seeds=[1,2]", "ablate"}) == 0);
  const std::string table = slurp(dir.path / "ablation.txt");
  CHECK(table.find("no_intra_group_variance") != std::string::npos);
  CHECK(table.find("no_ate_calibration") != std::string::npos);
  CHECK(table.find("static_scheduler") != std::string::npos);
}

TEST_CASE("sensitivity grid writes one row per cell") {
  TempDir dir("cbdt_cli_grid");
  CHECK(run({"--output", dir.str().c_str(), "--set", "dataset.n=250", "--set",
             "booster.num_rounds=6", "--set", "seeds=[1]", "--set",
             "grid={\"lambda\":[0.1,1.0],\"alpha\":[0.5],\"eta\":[0.05,0.1],\"seeds_per_cell\":1}",
             "sensitivity"}) == 0);
  const std::string grid = slurp(dir.path / "grid.csv");
  // header plus 2*1*2 cells
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 5);
  CHECK(fs::exists(dir.path / "heatmap.svg"));
  CHECK(fs::exists(dir.path / "ranked.txt"));
}
