#include "nesy/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nesy::harness {

using nlohmann::json;
using envs::ConfigError;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(doc, "config",
            {"schema_version", "name", "env", "algorithms", "schedule", "guidance", "network", "reward_machine", "seeds",
             "max_total_steps", "max_episodes", "output_dir", "smoothing_window", "final_window", "record_timing", "save_checkpoints",
             "workers", "eval_episodes"});
  ExperimentConfig c;
  read(doc, "schema_version", c.schema_version, "config");
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  }
  read(doc, "name", c.name, "config");

  if (doc.contains("env")) {
    const auto& e = doc["env"];
    only_keys(e, "env", {"domain", "task", "grid_size", "num_keys", "max_steps", "seed"});
    read(e, "domain", c.env.domain, "env");
    read(e, "task", c.env.task, "env");
    read(e, "grid_size", c.env.grid_size, "env");
    read(e, "num_keys", c.env.num_keys, "env");
    read(e, "max_steps", c.env.max_steps, "env");
    read(e, "seed", c.env.seed, "env");
  }
  read(doc, "algorithms", c.algorithms, "config");

  if (doc.contains("schedule")) {
    const auto& s = doc["schedule"];
    only_keys(s, "schedule", {"epsilon_initial", "epsilon_final", "epsilon_fraction", "episodes"});
    read(s, "epsilon_initial", c.schedule.initial, "schedule");
    read(s, "epsilon_final", c.schedule.final, "schedule");
    read(s, "epsilon_fraction", c.schedule.fraction, "schedule");
    read(s, "episodes", c.schedule.episodes, "schedule");
  }

  if (doc.contains("guidance")) {
    const auto& g = doc["guidance"];
    only_keys(g, "guidance",
              {"rho", "policy_file", "action_map_file", "use_sr_exploration", "use_sr_exploitation", "rescale_weights",
               "grounding"});
    read(g, "rho", c.guidance.rho, "guidance");
    std::string policy, action_map, weights = "raw", grounding = "precomputed";
    read(g, "policy_file", policy, "guidance");
    read(g, "action_map_file", action_map, "guidance");
    read(g, "use_sr_exploration", c.guidance.use_sr_exploration, "guidance");
    read(g, "use_sr_exploitation", c.guidance.use_sr_exploitation, "guidance");
    read(g, "rescale_weights", weights, "guidance");
    read(g, "grounding", grounding, "guidance");
    c.guidance.policy_file = resolve(base_dir, policy);
    c.guidance.action_map_file = resolve(base_dir, action_map);
    if (weights == "raw") {
      c.guidance.rescale_weights = agent::WeightMode::Raw;
    } else if (weights == "normalized") {
      c.guidance.rescale_weights = agent::WeightMode::Normalized;
    } else {
      throw ConfigError("guidance.rescale_weights must be 'raw' or 'normalized'");
    }
    if (grounding != "precomputed" && grounding != "on_the_fly") {
      throw ConfigError("guidance.grounding must be 'precomputed' or 'on_the_fly'");
    }
    c.guidance.precompute_grounding = grounding == "precomputed";
  }

  if (doc.contains("network")) {
    const auto& n = doc["network"];
    only_keys(n, "network",
              {"hidden", "learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon", "gamma", "batch_size",
               "replay_capacity", "learning_starts", "train_frequency", "target_sync"});
    read(n, "hidden", c.network.hidden, "network");
    read(n, "learning_rate", c.network.adam.learning_rate, "network");
    read(n, "adam_beta1", c.network.adam.beta1, "network");
    read(n, "adam_beta2", c.network.adam.beta2, "network");
    read(n, "adam_epsilon", c.network.adam.epsilon, "network");
    read(n, "gamma", c.network.gamma, "network");
    read(n, "batch_size", c.network.batch_size, "network");
    read(n, "replay_capacity", c.network.replay_capacity, "network");
    read(n, "learning_starts", c.network.learning_starts, "network");
    read(n, "train_frequency", c.network.train_frequency, "network");
    read(n, "target_sync", c.network.target_sync, "network");
  }
  read(doc, "max_total_steps", c.network.max_total_steps, "config");
  read(doc, "max_episodes", c.network.max_episodes, "config");

  if (doc.contains("reward_machine")) {
    const auto& r = doc["reward_machine"];
    only_keys(r, "reward_machine", {"file", "bonus"});
    std::string file;
    read(r, "file", file, "reward_machine");
    c.reward_machine.file = resolve(base_dir, file);
    read(r, "bonus", c.reward_machine.bonus, "reward_machine");
  }

  read(doc, "seeds", c.seeds, "config");
  std::string out = c.output_dir.string();
  read(doc, "output_dir", out, "config");
  c.output_dir = resolve(base_dir, out);
  read(doc, "smoothing_window", c.smoothing_window, "config");
  read(doc, "final_window", c.final_window, "config");
  read(doc, "record_timing", c.record_timing, "config");
  read(doc, "save_checkpoints", c.save_checkpoints, "config");
  read(doc, "workers", c.workers, "config");
  read(doc, "eval_episodes", c.eval_episodes, "config");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  {
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  }
  if (algorithms.empty()) throw ConfigError("algorithms must not be empty");
  envs::normalized(env);
  try {
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  if (!(guidance.rho >= 0.0 && guidance.rho < 1.0)) throw ConfigError("guidance.rho must lie in [0, 1)");
  if (network.gamma < 0.0 || network.gamma > 1.0) throw ConfigError("network.gamma must lie in [0, 1]");
  if (network.batch_size == 0 || network.replay_capacity < network.batch_size) {
    throw ConfigError("network.batch_size must be positive and fit in the replay buffer");
  }
  if (network.train_frequency == 0 || network.target_sync == 0) {
    throw ConfigError("network.train_frequency and network.target_sync must be positive");
  }
  if (!(network.adam.learning_rate > 0.0)) throw ConfigError("network.learning_rate must be positive");
  for (auto h : network.hidden)
    if (h == 0) throw ConfigError("network.hidden sizes must be positive");
  if (network.max_total_steps == 0) throw ConfigError("max_total_steps must be positive");
  if (smoothing_window <= 0 || final_window <= 0) throw ConfigError("smoothing_window and final_window must be positive");
  if (workers <= 0) throw ConfigError("workers must be positive");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be non-negative");

  bool needs_policy = false;
  std::set<std::string> labels;
  for (const auto& a : algorithms) {
    if (!labels.insert(a).second) throw ConfigError("algorithm '" + a + "' listed twice");
    agent::Variant v;
    try {
      v = agent::parse_variant(a);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    needs_policy |= agent::uses_sr_exploration(v) || agent::uses_sr_exploitation(v);
  }
  if (needs_policy && guidance.policy_file.empty()) throw ConfigError("SR algorithms need guidance.policy_file");
  auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  must_exist(guidance.policy_file, "guidance.policy_file");
  must_exist(guidance.action_map_file, "guidance.action_map_file");
  must_exist(reward_machine.file, "reward_machine.file");
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["name"] = c.name;
  doc["env"] = {{"domain", c.env.domain},       {"task", c.env.task},           {"grid_size", c.env.grid_size},
                {"num_keys", c.env.num_keys},   {"max_steps", c.env.max_steps}, {"seed", c.env.seed}};
  doc["algorithms"] = c.algorithms;
  doc["schedule"] = {{"epsilon_initial", c.schedule.initial},
                     {"epsilon_final", c.schedule.final},
                     {"epsilon_fraction", c.schedule.fraction},
                     {"episodes", c.schedule.episodes}};
  doc["guidance"] = {{"rho", c.guidance.rho},
                     {"policy_file", c.guidance.policy_file.string()},
                     {"action_map_file", c.guidance.action_map_file.string()},
                     {"use_sr_exploration", c.guidance.use_sr_exploration},
                     {"use_sr_exploitation", c.guidance.use_sr_exploitation},
                     {"rescale_weights", c.guidance.rescale_weights == agent::WeightMode::Raw ? "raw" : "normalized"},
                     {"grounding", c.guidance.precompute_grounding ? "precomputed" : "on_the_fly"}};
  doc["network"] = {{"hidden", c.network.hidden},
                    {"learning_rate", c.network.adam.learning_rate},
                    {"adam_beta1", c.network.adam.beta1},
                    {"adam_beta2", c.network.adam.beta2},
                    {"adam_epsilon", c.network.adam.epsilon},
                    {"gamma", c.network.gamma},
                    {"batch_size", c.network.batch_size},
                    {"replay_capacity", c.network.replay_capacity},
                    {"learning_starts", c.network.learning_starts},
                    {"train_frequency", c.network.train_frequency},
                    {"target_sync", c.network.target_sync}};
  doc["reward_machine"] = {{"file", c.reward_machine.file.string()}, {"bonus", c.reward_machine.bonus}};
  doc["seeds"] = c.seeds;
  doc["max_total_steps"] = c.network.max_total_steps;
  doc["max_episodes"] = c.network.max_episodes;
  doc["output_dir"] = c.output_dir.string();
  doc["smoothing_window"] = c.smoothing_window;
  doc["final_window"] = c.final_window;
  doc["record_timing"] = c.record_timing;
  doc["save_checkpoints"] = c.save_checkpoints;
  doc["workers"] = c.workers;
  doc["eval_episodes"] = c.eval_episodes;
  return doc.dump(2);
}

agent::TrainConfig train_config_for(const ExperimentConfig& c, const std::string& algorithm) {
  agent::TrainConfig t;
  t.variant = agent::parse_variant(algorithm);
  // Toggles switch off SR components of the guided variants.
  const bool explore = agent::uses_sr_exploration(t.variant) && c.guidance.use_sr_exploration;
  const bool exploit = agent::uses_sr_exploitation(t.variant) && c.guidance.use_sr_exploitation;
  if (t.variant != agent::Variant::RMDQN) {
    t.variant = explore && exploit ? agent::Variant::SRDQN
                : explore          ? agent::Variant::SRExploration
                : exploit          ? agent::Variant::SRExploitation
                                   : agent::Variant::DQN;
  }
  t.env = envs::normalized(c.env);
  t.schedule = c.schedule;
  t.guidance.rho = c.guidance.rho;
  t.guidance.rescale_weights = c.guidance.rescale_weights;
  t.hyper = c.network;
  t.record_timing = c.record_timing;
  return t;
}

}  // namespace nesy::harness
