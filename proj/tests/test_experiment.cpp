#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ppm/config.hpp"
#include "ppm/errors.hpp"
#include "ppm/experiment.hpp"

using namespace ppm;
namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "env = tcm\n"
    "episodes = 3000\n"
    "strategy = cut\n"
    "eval_steps = 3000\n"
    "trials = 2\n"
    "sources = oracle,pp,som\n";

ExperimentConfig small_config() {
  std::istringstream in(kSmall);
  return parse_config(in);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ppm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PPM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing, defaults and errors") {
  const auto cfg = small_config();
  CHECK(cfg.episodes == 3000);
  CHECK(cfg.alpha == 1e-5);
  CHECK(cfg.episode_length == 10);
  CHECK(cfg.strategy == Strategy::cut);
  auto fails_with = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_config(in);
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("env = tcm\nepisods = 5\n", "line 2"));
  CHECK(fails_with("seed = 1\nseed = 2\n", "duplicate"));
  CHECK(fails_with("episodes = many\n", "episodes"));
  CHECK(fails_with("strategy = guess\n", "strategy"));
  CHECK(fails_with("just words\n", "line 1"));
  CHECK(fails_with("sources = oracle,crystal\n", "crystal"));
}

TEST_CASE("config hash follows the canonical form") {
  std::istringstream a("# comment\nseed = 1\nenv = tcm\n"), b("env=tcm\n\nseed =  1\n"), c("env = tcm\nseed = 2\n");
  const auto ca = parse_config(a), cb = parse_config(b), cc = parse_config(c);
  CHECK(ca.canonical() == cb.canonical());
  CHECK(ca.hash() == cb.hash());
  CHECK(ca.hash() != cc.hash());
  CHECK(ca.hash().size() == 16);
  std::istringstream back(ca.canonical());
  CHECK(parse_config(back).hash() == ca.hash());
}

TEST_CASE("stages report missing prerequisites and stale artifacts") {
  const auto dir = fresh_dir("stages");
  const auto cfg = small_config();
  try {
    run_stage("estimate-profiles", cfg, dir.string());
    FAIL("expected a prerequisite error");
  } catch (const PrerequisiteError& e) {
    CHECK(std::string(e.what()).find("gen-data") != std::string::npos);
  }
  run_stage("gen-data", cfg, dir.string());
  run_stage("estimate-profiles", cfg, dir.string());
  auto other = cfg;
  other.seed = 99;
  CHECK_THROWS_AS(run_stage("translate", other, dir.string()), StaleArtifactError);
  CHECK_THROWS_AS(run_stage("bogus", cfg, dir.string()), ConfigError);
}

TEST_CASE("full pipeline produces three profiles and a complete eval table") {
  const auto dir = fresh_dir("all");
  const auto cfg = small_config();
  run_stage("all", cfg, dir.string());
  for (const char* f : {"data.traj", "profiles.csv", "pp.traj", "ppmodel.txt", "eval.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / f));
  }
  std::ifstream profiles(dir / "profiles.csv");
  std::string line;
  int rows = 0;
  while (std::getline(profiles, line)) rows += !line.empty() && std::isdigit(static_cast<unsigned char>(line[0]));
  CHECK(rows == 3);
  std::ifstream eval(dir / "eval.csv");
  std::getline(eval, line);
  CHECK(line.rfind("config_hash,training_size,trial,seed,source", 0) == 0);
  int eval_rows = 0;
  while (std::getline(eval, line)) {
    ++eval_rows;
    CHECK(line.rfind(cfg.hash() + ",3000,", 0) == 0);
  }
  CHECK(eval_rows == 6);
  CHECK(slurp(dir / "manifest.json").find(cfg.hash()) != std::string::npos);

  const auto again = fresh_dir("all_again");
  run_stage("all", cfg, again.string());
  for (const char* f : {"data.traj", "profiles.csv", "pp.traj", "ppmodel.txt", "eval.csv"}) {
    CHECK(slurp(dir / f) == slurp(again / f));
  }
}

TEST_CASE("plotdata merges eval tables in long format") {
  const auto dir = fresh_dir("plot");
  std::vector<std::string> inputs;
  for (int size : {1000, 2000, 4000}) {
    std::vector<EvalRow> rows;
    for (int trial = 0; trial < 5; ++trial) {
      for (auto src : {FeatureSource::pp, FeatureSource::som}) {
        EvalRow r;
        r.training_size = size;
        r.trial = trial;
        r.seed = 100 + static_cast<std::uint64_t>(trial);
        r.record.source = feature_source_name(src);
        r.record.steps = 10;
        r.record.avg_reward = 0.5;
        r.record.has_rmse = src == FeatureSource::pp;
        r.record.rmse = 0.1;
        r.record.per_test_rmse = {0.1};
        rows.push_back(r);
      }
    }
    const auto path = dir / ("eval_" + std::to_string(size) + ".csv");
    std::ofstream out(path);
    write_eval_csv(out, rows, {TestOfInterest::single("t", 0, {0})}, "abc");
    inputs.push_back(path.string());
  }
  std::stringstream merged;
  emit_plotdata(inputs, merged);
  std::string line;
  std::getline(merged, line);
  CHECK(line == "training_size,method,seed,metric,value,config_hash");
  std::map<std::string, int> per_metric;
  while (std::getline(merged, line)) {
    std::vector<std::string> f;
    std::istringstream ss(line);
    std::string v;
    while (std::getline(ss, v, ',')) f.push_back(v);
    REQUIRE(f.size() == 6);
    ++per_metric[f[3]];
  }
  CHECK(per_metric["avg_reward"] == 30);
  CHECK(per_metric["fallback_count"] == 30);
  CHECK(per_metric["rmse"] == 15);

  std::stringstream sink;
  CHECK_THROWS_AS(emit_plotdata({}, sink), ConfigError);
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "config_hash,training_size,seed,source,avg_reward\nabc,1,2,pp,0.5\n";
  try {
    emit_plotdata({bad.string()}, sink);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("rmse") != std::string::npos);
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("cli");
  const auto cfg = dir / "small.cfg";
  std::ofstream(cfg) << kSmall;
  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "colour = blue\n";
  const std::string out = " --out " + (dir / "out").string();
  CHECK(run_cli("translate --config " + cfg.string() + out) == 3);
  CHECK(run_cli("gen-data --config " + bad.string() + out) == 2);
  CHECK(run_cli("gen-data --config " + (dir / "missing.cfg").string() + out) == 2);
  CHECK(run_cli("gen-data") == 2);
  CHECK(run_cli("gen-data --config " + cfg.string() + out) == 0);
  CHECK(run_cli("gen-data --config " + cfg.string() + " --seed 5" + out) == 0);
  CHECK(run_cli("estimate-profiles --config " + cfg.string() + out) == 3);
  CHECK(run_cli("plotdata") == 2);

  const auto machine = dir / "fig1.cfg";
  std::ofstream(machine) << "machine = " << PPM_DATA_DIR << "/tcm_fig1.machine\nsdm_history_len = 4\nsdm_test_len = 2\n";
  CHECK(run_cli("sdm-check --config " + machine.string() + out) == 0);
  CHECK(slurp(dir / "out" / "sdm.txt").find("\nrank 3\n") != std::string::npos);
}
