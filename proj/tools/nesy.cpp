// nesy: train, ablate, evaluate and inspect guided DQN agents.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/agent/train.hpp"
#include "nesy/harness/config.hpp"
#include "nesy/harness/experiment.hpp"
#include "nesy/neural/qnetwork.hpp"
#include "nesy/rm/reward_machine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nesy;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  return seeds;
}

struct Checkpoint {
  neural::QNetwork net;
  envs::EnvConfig env;
  double gamma = 0.99;
  std::optional<rm::RewardMachine> machine;
};

Checkpoint load_checkpoint(const fs::path& path, const std::string& config_path) {
  Checkpoint c;
  c.net = neural::QNetwork::load(path);
  const fs::path side = path.string() + ".json";
  if (fs::exists(side)) {
    std::ifstream in(side);
    const auto doc = json::parse(in);
    const auto& e = doc.at("env");
    c.env.domain = e.at("domain").get<std::string>();
    c.env.task = e.at("task").get<std::string>();
    c.env.grid_size = e.at("grid_size").get<int>();
    c.env.num_keys = e.at("num_keys").get<int>();
    c.env.max_steps = e.at("max_steps").get<int>();
    c.gamma = doc.value("gamma", 0.99);
    if (doc.contains("reward_machine")) c.machine = rm::machine_from_json_text(doc.at("reward_machine").dump());
  }
  if (!config_path.empty()) {
    const auto cfg = harness::load_config(config_path);
    c.env = cfg.env;
    c.gamma = cfg.network.gamma;
  } else if (!fs::exists(side)) {
    throw std::runtime_error("no sidecar " + side.string() + "; pass --config");
  }
  return c;
}

int cmd_timing(const fs::path& dir) {
  struct Row {
    double wall = 0, symbolic = 0;
    int runs = 0;
  };
  std::map<std::string, Row> rows;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.rfind("seed_", 0) != 0 || entry.path().extension() != ".json" ||
        name.find(".qnet") != std::string::npos)
      continue;
    std::ifstream in(entry.path());
    const auto doc = json::parse(in);
    auto& r = rows[fs::relative(entry.path().parent_path(), dir).string()];
    r.wall += doc.at("wall_seconds").get<double>();
    r.symbolic += doc.at("symbolic_seconds").get<double>();
    ++r.runs;
  }
  if (rows.empty()) {
    std::cerr << "no run summaries under " << dir << '\n';
    return 1;
  }
  const double base = rows.contains("dqn") ? rows["dqn"].wall : 0.0;
  std::cout << std::left << std::setw(24) << "label" << std::right << std::setw(6) << "runs" << std::setw(12) << "total_s"
            << std::setw(12) << "symbolic_s" << std::setw(12) << "increment" << std::setw(12) << "vs_dqn" << '\n';
  for (const auto& [label, r] : rows) {
    const auto t = harness::timing_report(r.wall, r.symbolic);
    std::cout << std::left << std::setw(24) << label << std::right << std::setw(6) << r.runs << std::fixed
              << std::setprecision(2) << std::setw(12) << t.total_seconds << std::setw(12) << t.symbolic_seconds
              << std::setw(11) << t.increment_percent << '%';
    if (base > 0.0) std::cout << std::setw(11) << 100.0 * (r.wall / base - 1.0) << '%';
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic DQN experiments on DoorKey and OfficeWorld"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_text, checkpoint;
  std::vector<std::string> sweeps;
  int workers = 0, episodes = 10;
  std::uint64_t seed = 0;
  bool render = false, quiet = false;

  auto* run = app.add_subcommand("run", "train every algorithm of a config over its seeds");
  run->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds_text, "comma-separated seeds overriding the config");
  run->add_option("--out", out_dir, "output directory overriding the config");
  run->add_option("--workers", workers, "parallel runs");
  run->add_flag("--quiet", quiet, "no per-run progress lines");

  auto* ablate = app.add_subcommand("ablate", "component ablation with rho / epsilon sweeps");
  ablate->add_option("--config", config_path, "base experiment JSON")->required()->check(CLI::ExistingFile);
  ablate->add_option("--sweep", sweeps, "rho=v1,v2,... or eps=f:r,...");
  ablate->add_option("--out", out_dir, "output directory overriding the config");
  ablate->add_option("--workers", workers, "parallel runs");
  ablate->add_flag("--quiet", quiet, "no per-run progress lines");

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, ".qnet file")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", episodes, "episodes")->check(CLI::PositiveNumber);
  eval->add_option("--config", config_path, "take the environment from this config instead of the sidecar");
  eval->add_option("--seed", seed, "layout seed");
  eval->add_flag("--render", render, "print the first episode");

  auto* replay = app.add_subcommand("replay", "ASCII-render one greedy episode of a checkpoint");
  replay->add_option("--checkpoint", checkpoint, ".qnet file")->required()->check(CLI::ExistingFile);
  replay->add_option("--config", config_path, "take the environment from this config instead of the sidecar");
  replay->add_option("--seed", seed, "layout seed");

  std::string timing_dir;
  auto* timing = app.add_subcommand("timing", "neural/symbolic time table of a finished run directory");
  timing->add_option("dir", timing_dir, "output directory of run or ablate")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *ablate) {
      auto cfg = harness::load_config(config_path);
      if (!seeds_text.empty()) cfg.seeds = parse_seeds(seeds_text);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (workers > 0) cfg.workers = workers;
      std::ostream* log = quiet ? nullptr : &std::cerr;
      harness::AggregateReport report;
      if (*run) {
        report = harness::run_experiment(cfg, log);
      } else {
        report = harness::ablation_suite(cfg, harness::parse_sweep(sweeps), log);
      }
      for (const auto& v : report.variants) {
        std::cout << std::left << std::setw(24) << v.label << " final-window return " << std::fixed << std::setprecision(4)
                  << v.final_mean << " +- " << v.final_stddev << "  symbolic increment " << std::setprecision(2)
                  << v.timing.increment_percent << "%\n";
      }
      for (const auto& f : report.failures) std::cerr << "failed: " << f << '\n';
      return report.ok() ? 0 : 1;
    }

    if (*eval || *replay) {
      auto ck = load_checkpoint(checkpoint, config_path);
      std::optional<rm::MachineAugmenter> aug;
      if (ck.machine) aug.emplace(*ck.machine);
      agent::Augmenter* augp = aug ? &*aug : nullptr;
      auto env = envs::make_environment(envs::normalized(ck.env));
      const std::size_t expected = env->observation_size() + (augp ? augp->extra_features() : 0);
      if (ck.net.input_size() != expected || ck.net.output_size() != static_cast<std::size_t>(env->action_count())) {
        throw std::runtime_error("checkpoint shape does not match the environment");
      }

      if (*replay || render) {
        auto rng = agent::make_rng(seed, 2);
        env->reset(rng());
        if (augp) augp->reset(*env);
        std::cout << env->render() << '\n';
        while (!env->terminal()) {
          const int a = neural::argmax(ck.net.forward(agent::observe(*env, augp)));
          if (augp) augp->before_step(*env);
          const auto r = env->step(a);
          if (augp) augp->after_step(*env, a, r);
          std::cout << "action " << env->action_names()[static_cast<std::size_t>(a)] << "  reward " << r.reward << '\n'
                    << env->render() << '\n';
        }
        std::cout << (env->task_success() ? "success" : "failure") << " after " << env->step_count() << " steps\n";
        if (*replay) return 0;
      }
      const auto res = agent::evaluate(ck.net, ck.env, episodes, ck.gamma, seed, augp);
      std::cout << "episodes " << episodes << "  mean discounted return " << std::fixed << std::setprecision(4) << res.mean
                << "  std " << res.stddev << "  success rate " << res.success_rate << '\n';
      return 0;
    }

    if (*timing) return cmd_timing(timing_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
