#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nesy/harness/config.hpp"
#include "nesy/harness/experiment.hpp"

using namespace nesy;
using namespace nesy::harness;
namespace fs = std::filesystem;

namespace {

std::string tiny_config_json(const fs::path& out, const std::string& algorithms = R"(["dqn", "sr-dqn"])") {
  const auto policy = (fs::path(NESY_SOURCE_DIR) / "policies" / "doorkey.lp").string();
  return R"({
    "schema_version": 1,
    "name": "tiny",
    "env": {"domain": "doorkey", "grid_size": 5, "num_keys": 1},
    "algorithms": )" + algorithms + R"(,
    "schedule": {"epsilon_initial": 1.0, "epsilon_final": 0.3, "epsilon_fraction": 0.3, "episodes": 50},
    "guidance": {"rho": 0.8, "policy_file": ")" + policy + R"("},
    "network": {"hidden": [16], "batch_size": 8, "learning_starts": 100, "target_sync": 100},
    "seeds": [0, 1],
    "max_total_steps": 800,
    "output_dir": ")" + out.string() + R"(",
    "smoothing_window": 3,
    "final_window": 5,
    "record_timing": false
  })";
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nesy_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing and defaults") {
  const auto cfg = parse_config(tiny_config_json("/tmp/x"));
  CHECK(cfg.name == "tiny");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(cfg.network.hidden == std::vector<std::size_t>{16});
  CHECK(cfg.network.gamma == 0.99);
  CHECK(cfg.network.train_frequency == 4);
  CHECK(cfg.schedule.final == 0.3);
  CHECK(cfg.guidance.rho == 0.8);
  CHECK_NOTHROW(cfg.validate());
  // The serialized form parses back to the same document.
  const auto again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(R"({"unknown_key": 1})"), envs::ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"network": {"lr": 1}})"), envs::ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), envs::ConfigError);
  CHECK_THROWS_AS(parse_config("{"), envs::ConfigError);
  auto cfg = parse_config(tiny_config_json("/tmp/x"));
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), envs::ConfigError);
  cfg = parse_config(tiny_config_json("/tmp/x"));
  cfg.guidance.policy_file = "/nonexistent/policy.lp";
  CHECK_THROWS_AS(cfg.validate(), envs::ConfigError);
  cfg = parse_config(tiny_config_json("/tmp/x"));
  cfg.guidance.policy_file.clear();
  CHECK_THROWS_AS(cfg.validate(), envs::ConfigError);
  CHECK_THROWS_AS(parse_config(tiny_config_json("/tmp/x", R"(["dqn", "dqn"])")), envs::ConfigError);
}

TEST_CASE("relative paths resolve against the config file") {
  const auto dir = scratch("cfgdir");
  std::ofstream(dir / "p.lp") << "left :- goto(X), on_left(X).\ngoto(X) :- goal(X), unlocked.\n";
  const auto cfg = parse_config(R"({"guidance": {"policy_file": "p.lp"}, "output_dir": "out"})", dir);
  CHECK(cfg.guidance.policy_file == dir / "p.lp");
  CHECK(cfg.output_dir == dir / "out");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("toggles select the variant") {
  auto cfg = parse_config(tiny_config_json("/tmp/x"));
  cfg.guidance.use_sr_exploitation = false;
  CHECK(train_config_for(cfg, "sr-dqn").variant == agent::Variant::SRExploration);
  cfg.guidance.use_sr_exploitation = true;
  cfg.guidance.use_sr_exploration = false;
  CHECK(train_config_for(cfg, "sr-dqn").variant == agent::Variant::SRExploitation);
  CHECK(train_config_for(cfg, "dqn").variant == agent::Variant::DQN);
}

TEST_CASE("timing report arithmetic") {
  const auto t = timing_report(105.0, 5.0);
  CHECK(t.increment_percent == doctest::Approx(5.0));
  CHECK(timing_report(10.0, 0.0).increment_percent == 0.0);
}

TEST_CASE("episode aggregate") {
  using agent::EpisodeRecord;
  auto rec = [](std::initializer_list<double> v) {
    std::vector<EpisodeRecord> out;
    int e = 0;
    for (double x : v) {
      EpisodeRecord r;
      r.episode = e++;
      r.discounted_return = x;
      out.push_back(r);
    }
    return out;
  };
  const auto rows = aggregate_by_episode({rec({0.0, 1.0, 0.5}), rec({1.0, 0.0})}, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].mean == 0.5);
  CHECK(rows[0].stddev == doctest::Approx(0.5));
  CHECK(rows[1].smoothed_mean == doctest::Approx(0.5));
  CHECK(final_window_mean(rec({0.0, 1.0, 0.5}), 2) == doctest::Approx(0.75));
  CHECK(final_window_mean(rec({0.2}), 10) == doctest::Approx(0.2));
}

TEST_CASE("sweep parsing") {
  const auto d = parse_sweep({});
  CHECK(d.rho == std::vector<double>{0.5, 0.8, 0.95});
  CHECK(std::find(d.epsilon.begin(), d.epsilon.end(), std::pair<double, double>{0.3, 0.3}) != d.epsilon.end());
  const auto s = parse_sweep({"rho=0.6", "eps=0.1:0.2,0.3:0.3"});
  CHECK(s.rho == std::vector<double>{0.6});
  CHECK(s.epsilon.size() == 2);
  CHECK_THROWS(parse_sweep({"beta=1"}));
  const auto specs = ablation_specs(parse_config(tiny_config_json("/tmp/x")), parse_sweep({"rho=0.5,0.8,0.95", "eps=0.3:0.3"}));
  std::vector<std::string> labels;
  for (const auto& sp : specs) labels.push_back(sp.label);
  CHECK(labels == std::vector<std::string>{"dqn", "sr-exploration", "sr-exploitation", "sr-dqn", "rho_0.5", "rho_0.8",
                                           "rho_0.95", "eps_0.3_0.3"});
}

TEST_CASE("run writes per-seed files and consistent aggregates") {
  const auto out = scratch("run");
  const auto cfg = parse_config(tiny_config_json(out));
  const auto report = run_experiment(cfg);
  REQUIRE(report.ok());
  for (const char* label : {"dqn", "sr-dqn"}) {
    const auto dir = out / label;
    std::vector<std::vector<agent::EpisodeRecord>> runs;
    for (int s : {0, 1}) {
      CHECK(fs::exists(dir / ("seed_" + std::to_string(s) + ".json")));
      CHECK(fs::exists(dir / ("seed_" + std::to_string(s) + ".qnet")));
      runs.push_back(agent::read_metrics_csv(dir / ("seed_" + std::to_string(s) + ".csv")));
    }
    // Recompute the per-episode mean from the per-seed CSVs.
    std::ifstream agg(dir / "aggregate.csv");
    std::string line;
    std::getline(agg, line);
    std::size_t e = 0;
    while (std::getline(agg, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(e < std::min(runs[0].size(), runs[1].size()));
      CHECK(v[1] == doctest::Approx((runs[0][e].discounted_return + runs[1][e].discounted_return) / 2.0).epsilon(1e-12));
      ++e;
    }
    CHECK(e == std::min(runs[0].size(), runs[1].size()));
    CHECK(fs::exists(dir / "aggregate_by_step.csv"));
    CHECK(report.variant(label).runs.size() == 2);
  }
  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(doc.contains("variants"));
  CHECK(fs::exists(out / "config.json"));
}

TEST_CASE("reruns are byte identical") {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  auto cfg = parse_config(tiny_config_json(a));
  cfg.seeds = {4};
  run_experiment(cfg);
  cfg.output_dir = b;
  run_experiment(cfg);
  for (const char* f : {"dqn/seed_4.csv", "sr-dqn/seed_4.csv", "sr-dqn/aggregate.csv", "sr-dqn/seed_4.qnet"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("rm-dqn runs through the harness") {
  const auto out = scratch("rm");
  auto cfg = parse_config(tiny_config_json(out, R"(["rm-dqn"])"));
  cfg.guidance.policy_file.clear();
  cfg.seeds = {0};
  const auto report = run_experiment(cfg);
  REQUIRE(report.ok());
  CHECK(fs::exists(out / "rm-dqn" / "seed_0.csv"));
}

}  // TEST_SUITE
