#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dynum/commands.hpp"
#include "dynum/concave_fit.hpp"
#include "dynum/errors.hpp"

using namespace dynum;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("dynum_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTinyPandemicConfig = R"json({
  "schema": 1,
  "mode": "pandemic",
  "seed": 4242,
  "supply": 2,
  "plan": {"horizon": 4, "update_period": 2, "windows": 2, "gamma": 0.99},
  "policy": {"kind": "old_first"},
  "eval": {"replicas": 12, "grid_max": 2, "workers": 2},
  "sites": [
    {"demographics": {"teens": 3, "adults": 6, "elderly": 3, "er_edge_prob": 0.2},
     "dt": 1.0, "initial_infected": 2},
    {"demographics": {"teens": 2, "adults": 5, "elderly": 4, "er_edge_prob": 0.25},
     "dt": 1.0, "initial_infected": 2}
  ]
})json";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config validation rejects unknown keys and bad schema") {
  CHECK_THROWS_AS(cfg::parse_experiment_config(R"({"schema": 1, "mode": "pandemic",
    "frobnicate": true, "sites": [{"demographics": {"adults": 2}}]})"),
                  ConfigError);
  CHECK_THROWS_AS(cfg::parse_experiment_config(R"({"schema": 9, "mode": "pandemic",
    "sites": [{"demographics": {"adults": 2}}]})"),
                  ConfigError);
  CHECK_THROWS_AS(cfg::parse_experiment_config(R"({"mode": "pandemic",
    "sites": [{"demographics": {"adults": 2}}]})"),
                  ConfigError);
  CHECK_THROWS_AS(cfg::parse_experiment_config(R"({"schema": 1, "mode": "tsunami", "sites": [{}]})"),
                  ConfigError);
  CHECK_THROWS_AS(cfg::parse_experiment_config(R"({"schema": 1, "mode": "pandemic", "sites": []})"),
                  ConfigError);
  CHECK_NOTHROW(cfg::parse_experiment_config(kTinyPandemicConfig));
}

TEST_CASE("evaluate writes the documented CSV shape") {
  const fs::path dir = temp_dir("evaluate");
  spit(dir / "config.json", kTinyPandemicConfig);
  cmd::CommonArgs args;
  args.config_path = (dir / "config.json").string();
  args.output_dir = (dir / "out").string();
  REQUIRE(cmd::cmd_evaluate(args) == cmd::kExitOk);

  const std::string csv = slurp(dir / "out" / "evaluate.csv");
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "site,y,mean,stderr,replicas");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2 * 3);  // two sites, budgets 0..2
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("run replays byte-identically from the same config and seed") {
  const fs::path dir = temp_dir("replay");
  spit(dir / "config.json", kTinyPandemicConfig);
  cmd::CommonArgs args;
  args.config_path = (dir / "config.json").string();

  args.output_dir = (dir / "out1").string();
  REQUIRE(cmd::cmd_run(args) == cmd::kExitOk);
  args.output_dir = (dir / "out2").string();
  REQUIRE(cmd::cmd_run(args) == cmd::kExitOk);

  for (const char* name :
       {"market_trace.csv", "allocations.csv", "ground_0.csv", "ground_1.csv", "manifest.json"}) {
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));
  }
  // A different seed produces different ground trajectories.
  args.output_dir = (dir / "out3").string();
  args.seed_override = 777;
  REQUIRE(cmd::cmd_run(args) == cmd::kExitOk);
  CHECK(slurp(dir / "out1" / "ground_0.csv") != slurp(dir / "out3" / "ground_0.csv"));
}

TEST_CASE("run outputs satisfy the supply constraint in every window") {
  const fs::path dir = temp_dir("feasible");
  spit(dir / "config.json", kTinyPandemicConfig);
  cmd::CommonArgs args;
  args.config_path = (dir / "config.json").string();
  args.output_dir = (dir / "out").string();
  REQUIRE(cmd::cmd_run(args) == cmd::kExitOk);

  std::istringstream lines(slurp(dir / "out" / "allocations.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "window,site,alloc,demand,lambda,stale,market_converged,realized_utility");
  std::map<int, int> alloc_per_window;
  while (std::getline(lines, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    const int window = std::stoi(cell);
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    alloc_per_window[window] += std::stoi(cell);
  }
  REQUIRE(alloc_per_window.size() == 2);
  for (const auto& [w, total] : alloc_per_window) CHECK(total <= 2);
}

TEST_CASE("golden file: tiny deterministic run") {
  const fs::path dir = temp_dir("golden");
  spit(dir / "config.json", kTinyPandemicConfig);
  cmd::CommonArgs args;
  args.config_path = (dir / "config.json").string();
  args.output_dir = (dir / "out").string();
  REQUIRE(cmd::cmd_run(args) == cmd::kExitOk);

  const fs::path golden = fs::path(DYNUM_GOLDEN_DIR) / "tiny_run_allocations.csv";
  if (const char* update = std::getenv("DYNUM_UPDATE_GOLDEN"); update && *update == '1') {
    fs::create_directories(golden.parent_path());
    fs::copy_file(dir / "out" / "allocations.csv", golden, fs::copy_options::overwrite_existing);
  }
  REQUIRE_MESSAGE(fs::exists(golden), "golden file missing; regenerate with DYNUM_UPDATE_GOLDEN=1");
  CHECK(slurp(dir / "out" / "allocations.csv") == slurp(golden));
}

TEST_CASE("fit subcommand round-trips through a samples CSV") {
  const fs::path dir = temp_dir("fit");
  spit(dir / "samples.csv", "0,0\n1,0\n2,2\n");
  const fs::path model_path = dir / "model.txt";
  REQUIRE(cmd::cmd_fit((dir / "samples.csv").string(), model_path.string()) == cmd::kExitOk);
  const fit::PwlUtility m = fit::PwlUtility::from_text(slurp(model_path));
  REQUIRE(m.size() == 3);
  CHECK(m.anchors()[0].u_hat == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(m.check_invariants());
}

TEST_CASE("errors map to the documented exit codes") {
  cmd::CommonArgs args;
  args.config_path = "/nonexistent/config.json";
  CHECK(cmd::cmd_run(args) == cmd::kExitConfig);

  const fs::path dir = temp_dir("badmode");
  spit(dir / "config.json", R"({"schema":1,"mode":"tsunami","sites":[{"c":1.0}]})");
  args.config_path = (dir / "config.json").string();
  CHECK(cmd::cmd_run(args) == cmd::kExitConfig);

  CHECK(cmd::cmd_fit("/nonexistent/samples.csv", "/tmp/m.txt") == cmd::kExitConfig);
}

TEST_SUITE_END();
