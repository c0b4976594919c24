#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "orgmarl/harness.hpp"

using namespace orgmarl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig tiny_config(const std::string& out, const std::string& name) {
  RunConfig cfg;
  cfg.episodes = 10;
  cfg.horizon = 5;
  cfg.batch_episodes = 4;
  cfg.updates_per_batch = 1;
  cfg.hidden = 8;
  cfg.checkpoint_every = 5;
  cfg.out_dir = out;
  cfg.name = name;
  cfg.seed = 99;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("orgmarl_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config serialization round-trips through the parser") {
  RunConfig cfg;
  cfg.domain.beta = 3.5;
  cfg.domain.phi = 0.65;
  cfg.domain.eta_private = 0.25;
  cfg.domain.n_agents = 3;
  cfg.kinds = {AgentKind::IA2CPlus, AgentKind::IAC, AgentKind::IA2CMinus};
  cfg.episodes = 123;
  cfg.seed = 777;
  cfg.name = "roundtrip";

  // Re-read the serialized text through the file reader.
  TempDir tmp("config");
  const fs::path file = tmp.path / "cfg.txt";
  {
    std::ofstream os(file);
    os << serialize(cfg);
  }
  const RunConfig back = parse_config(read_key_value_file(file.string()));
  CHECK(back.domain.beta == cfg.domain.beta);
  CHECK(back.domain.phi == cfg.domain.phi);
  CHECK(back.domain.eta_private == cfg.domain.eta_private);
  CHECK(back.domain.n_agents == 3);
  CHECK(back.kinds == cfg.kinds);
  CHECK(back.episodes == 123);
  CHECK(back.seed == 777);
  CHECK(back.name == "roundtrip");
  CHECK(serialize(back) == serialize(cfg));
}

TEST_CASE("overrides beat file values and unknown keys are rejected") {
  RunConfig base;
  base = parse_config({{"beta", "3.25"}, {"episodes", "50"}}, base);
  CHECK(base.domain.beta == 3.25);
  base = parse_config({{"beta", "5.5"}}, base);
  CHECK(base.domain.beta == 5.5);
  CHECK(base.episodes == 50);  // untouched by the second layer
  CHECK_THROWS_AS(parse_config({{"betta", "3"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config({{"beta", "fast"}}), std::invalid_argument);
}

TEST_CASE("config files accept comments and blank lines") {
  TempDir tmp("kvfile");
  const fs::path file = tmp.path / "cfg.txt";
  {
    std::ofstream os(file);
    os << "# header comment\n\n  beta = 4.5  # trailing comment\nstart=h\nalgo=iac\n";
  }
  const auto kv = read_key_value_file(file.string());
  CHECK(kv.at("beta") == "4.5");
  const RunConfig cfg = parse_config(kv);
  CHECK(cfg.domain.beta == 4.5);
  CHECK(cfg.domain.start_level == Level::High);
  CHECK(cfg.kinds == std::vector<AgentKind>{AgentKind::IAC, AgentKind::IAC});
}

TEST_CASE("a run writes its artifacts and is reproducible byte for byte") {
  TempDir tmp("run");
  const RunOutcome a = run(tiny_config(tmp.path.string(), "a"));
  const RunOutcome b = run(tiny_config(tmp.path.string(), "b"));

  const fs::path dir_a = fs::path(a.run_dir);
  CHECK(fs::exists(dir_a / "config.txt"));
  CHECK(fs::exists(dir_a / "runlog.jsonl"));
  CHECK(fs::exists(dir_a / "certification.json"));
  CHECK(fs::exists(dir_a / "checkpoint_ep5_agent0_actor.txt"));
  CHECK(fs::exists(dir_a / "checkpoint_ep10_agent1_belief.txt"));

  // Identical seeds and settings: identical logs apart from the embedded name.
  std::string log_a = slurp(dir_a / "runlog.jsonl");
  std::string log_b = slurp(fs::path(b.run_dir) / "runlog.jsonl");
  const auto scrub = [](std::string s, const std::string& from) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const std::size_t hit = s.find(from, pos);
      if (hit == std::string::npos) { out += s.substr(pos); break; }
      out += s.substr(pos, hit - pos);
      pos = hit + from.size();
    }
    return out;
  };
  CHECK(scrub(log_a, "name=a") == scrub(log_b, "name=b"));
  CHECK(a.certification.gap == b.certification.gap);
  CHECK(a.episodes_run == 10);
}

TEST_CASE("noise sweeps are invariant to the worker count") {
  TempDir tmp("sweep");
  RunConfig base = tiny_config(tmp.path.string(), "sw");
  base.checkpoint_every = 0;

  const auto run_with_workers = [&](const char* workers, const std::string& sub) {
    setenv("ORGMARL_WORKERS", workers, 1);
    const SweepResult res =
        sweep_noise(base, {0.0, 0.3}, 2, (tmp.path / sub).string());
    unsetenv("ORGMARL_WORKERS");
    return res;
  };
  const SweepResult serial = run_with_workers("1", "serial");
  const SweepResult parallel = run_with_workers("4", "parallel");
  CHECK(serial.successes == parallel.successes);
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].seed == parallel.runs[i].seed);
    CHECK(serial.runs[i].gap == parallel.runs[i].gap);
  }
  CHECK(slurp(tmp.path / "serial" / "sweep.csv") ==
        slurp(tmp.path / "parallel" / "sweep.csv"));

  CHECK_THROWS(sweep_noise(base, {0.3, 0.3}, 1, (tmp.path / "bad").string()));
  CHECK_THROWS(sweep_noise(base, {0.0, 0.9}, 1, (tmp.path / "bad").string()));
}

TEST_CASE("plot exports are idempotent and handle empty input") {
  TempDir tmp("export");
  const RunConfig cfg = tiny_config(tmp.path.string(), "exp");
  const RunOutcome oc = run(cfg);

  const fs::path out = tmp.path / "plots";
  emit_plot_data({oc.run_dir}, out.string());
  const std::string first = slurp(out / "reward_vs_episode.csv");
  CHECK(!first.empty());
  CHECK(first.rfind("episode,", 0) == 0);
  emit_plot_data({oc.run_dir}, out.string());
  CHECK(slurp(out / "reward_vs_episode.csv") == first);
  CHECK(slurp(out / "crossover_h4.csv").rfind("beta,phi,horizon,winner,diff", 0) == 0);

  // No runs at all: headers only, no crash.
  const fs::path empty_out = tmp.path / "empty";
  emit_plot_data({}, empty_out.string());
  CHECK(slurp(empty_out / "reward_vs_episode.csv") ==
        "episode,mean_return,std_return,seeds\n");
  CHECK(slurp(empty_out / "success_vs_noise.csv") == "level,successes,runs,mean_gap\n");
}

TEST_CASE("invalid run configurations are rejected before any work") {
  RunConfig cfg;
  cfg.episodes = 0;
  CHECK_THROWS_AS(run(cfg), std::invalid_argument);
  cfg = RunConfig{};
  cfg.kinds = {AgentKind::IAC};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
