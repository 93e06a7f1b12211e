#include "nesy/agent/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "nesy/agent/replay.hpp"

namespace nesy::agent {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Stream tags for make_rng.
constexpr std::uint32_t kActionStream = 1;
constexpr std::uint32_t kEnvStream = 2;
constexpr std::uint32_t kLearnStream = 3;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::DQN:
      return "dqn";
    case Variant::SRDQN:
      return "sr-dqn";
    case Variant::SRExploration:
      return "sr-exploration";
    case Variant::SRExploitation:
      return "sr-exploitation";
    case Variant::RMDQN:
      return "rm-dqn";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (auto v : {Variant::DQN, Variant::SRDQN, Variant::SRExploration, Variant::SRExploitation, Variant::RMDQN})
    if (variant_name(v) == name) return v;
  throw std::invalid_argument("unknown algorithm variant '" + name + "'");
}

bool uses_sr_exploration(Variant v) { return v == Variant::SRDQN || v == Variant::SRExploration; }
bool uses_sr_exploitation(Variant v) { return v == Variant::SRDQN || v == Variant::SRExploitation; }

neural::Features observe(const envs::Environment& env, const Augmenter* augmenter) {
  thread_local std::vector<double> dense;
  dense.assign(env.observation_size(), 0.0);
  env.encode_observation(dense);
  auto f = neural::sparse_features(dense);
  if (augmenter) augmenter->append_features(f, static_cast<std::uint32_t>(env.observation_size()));
  return f;
}

RunMetrics train(const TrainConfig& config, std::uint64_t seed, const bridge::PolicyAdvisor* advisor,
                 Augmenter* augmenter, const EpisodeCallback& on_episode) {
  const auto& hp = config.hyper;
  config.schedule.validate();
  const bool sr_explore_on = uses_sr_exploration(config.variant);
  const bool sr_exploit_on = uses_sr_exploitation(config.variant);
  if ((sr_explore_on || sr_exploit_on) && !advisor) {
    throw std::invalid_argument(variant_name(config.variant) + " needs a logical policy");
  }
  if (config.variant == Variant::RMDQN && !augmenter) throw std::invalid_argument("rm-dqn needs a reward machine");
  if (!(config.guidance.rho >= 0.0 && config.guidance.rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  if (hp.batch_size == 0 || hp.train_frequency == 0 || hp.target_sync == 0) {
    throw std::invalid_argument("batch_size, train_frequency and target_sync must be positive");
  }
  if (hp.gamma < 0.0 || hp.gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");

  auto env = envs::make_environment(envs::normalized(config.env));
  if (advisor && advisor->bridge().domain_id != env->domain_id()) {
    throw std::invalid_argument("logical policy is for " + advisor->bridge().domain_id + ", environment is " +
                                env->domain_id());
  }
  const int n_actions = env->action_count();
  const std::size_t input = env->observation_size() + (augmenter ? augmenter->extra_features() : 0);

  Rng action_rng = make_rng(seed, kActionStream);
  Rng env_rng = make_rng(seed, kEnvStream);
  Rng learn_rng = make_rng(seed, kLearnStream);

  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hp.hidden.begin(), hp.hidden.end());
  sizes.push_back(static_cast<std::size_t>(n_actions));
  neural::QNetwork net(sizes, learn_rng());
  neural::QNetwork target = net;
  neural::Adam optimizer(net.parameter_count(), hp.adam);
  ReplayBuffer replay(hp.replay_capacity);

  RunMetrics metrics;
  const auto run_start = Clock::now();
  bool warned_negative = false;

  for (int e = 0; metrics.total_steps < hp.max_total_steps && (hp.max_episodes == 0 || static_cast<std::uint64_t>(e) < hp.max_episodes); ++e) {
    const double eps = epsilon_at(config.schedule, e);
    env->reset(env_rng());
    if (augmenter) augmenter->reset(*env);
    auto obs = observe(*env, augmenter);

    EpisodeRecord rec;
    rec.episode = e;
    rec.epsilon = eps;
    double loss_sum = 0.0, neural_s = 0.0, symbolic_s = 0.0;
    int updates = 0;
    double discount = 1.0;
    bool finished = false;

    while (metrics.total_steps < hp.max_total_steps) {
      const bool exploit = uniform01(action_rng) >= eps;
      const bool need_symbols = exploit ? sr_exploit_on : sr_explore_on;
      std::set<int> suggested;
      if (need_symbols) {
        const auto t0 = Clock::now();
        suggested = advisor->suggest(*env);
        symbolic_s += seconds_since(t0);
      }

      int action;
      if (exploit) {
        const auto t0 = Clock::now();
        const auto q = net.forward(obs);
        neural_s += seconds_since(t0);
        if (sr_exploit_on) {
          bool negative = false;
          action = sr_exploit(q, suggested, eps, config.guidance.rho, config.guidance.rescale_weights, &negative);
          if (negative) {
            ++metrics.negative_rescales;
            if (!warned_negative) {
              std::cerr << "warning: rescaling a negative Q-value (seed " << seed << ", episode " << e << ")\n";
              warned_negative = true;
            }
          }
        } else {
          action = neural::argmax(q);
        }
      } else {
        ++metrics.explore_steps;
        action = sr_explore_on ? sr_explore(action_rng, n_actions, suggested, config.guidance.rho)
                               : uniform_index(action_rng, n_actions);
      }

      if (augmenter) augmenter->before_step(*env);
      const auto result = env->step(action);
      const double bonus = augmenter ? augmenter->after_step(*env, action, result) : 0.0;
      auto next = observe(*env, augmenter);

      rec.ret += result.reward;
      rec.discounted_return += discount * result.reward;
      discount *= hp.gamma;
      ++rec.steps;
      ++metrics.total_steps;

      replay.push({std::move(obs), action, result.reward + bonus, next, result.terminal && !result.truncated});
      obs = std::move(next);

      const auto t0 = Clock::now();
      if (metrics.total_steps >= hp.learning_starts && metrics.total_steps % hp.train_frequency == 0 &&
          replay.size() >= hp.batch_size) {
        const auto batch = replay.sample(learn_rng, hp.batch_size);
        loss_sum += neural::train_step(net, target, batch, hp.gamma, optimizer);
        ++updates;
      }
      if (metrics.total_steps % hp.target_sync == 0) neural::sync_target(net, target);
      neural_s += seconds_since(t0);

      if (result.terminal) {
        rec.success = result.success;
        finished = true;
        break;
      }
    }

    metrics.neural_seconds += neural_s;
    metrics.symbolic_seconds += symbolic_s;
    if (!finished) break;
    rec.loss_mean = updates ? loss_sum / updates : 0.0;
    rec.neural_ms_per_step = 1e3 * neural_s / rec.steps;
    rec.symbolic_ms_per_step = 1e3 * symbolic_s / rec.steps;
    rec.total_steps = metrics.total_steps;
    metrics.episodes.push_back(rec);
    if (on_episode) on_episode(rec);
  }

  metrics.wall_seconds = seconds_since(run_start);
  metrics.network = std::move(net);
  return metrics;
}

EvalResult evaluate_policy(const std::function<int(const envs::Environment&)>& policy, const envs::EnvConfig& env_config,
                           int episodes, double gamma, std::uint64_t seed) {
  if (episodes <= 0) throw std::invalid_argument("evaluation needs at least one episode");
  auto env = envs::make_environment(envs::normalized(env_config));
  Rng env_rng = make_rng(seed, kEnvStream);
  EvalResult out;
  int successes = 0;
  for (int k = 0; k < episodes; ++k) {
    env->reset(env_rng());
    double g = 0.0, discount = 1.0;
    while (!env->terminal()) {
      const auto r = env->step(policy(*env));
      g += discount * r.reward;
      discount *= gamma;
    }
    successes += env->task_success() ? 1 : 0;
    out.returns.push_back(g);
  }
  double sum = 0.0;
  for (double g : out.returns) sum += g;
  out.mean = sum / episodes;
  double ss = 0.0;
  for (double g : out.returns) ss += (g - out.mean) * (g - out.mean);
  out.stddev = std::sqrt(ss / episodes);
  out.success_rate = static_cast<double>(successes) / episodes;
  return out;
}

EvalResult evaluate(const neural::QNetwork& net, const envs::EnvConfig& env, int episodes, double gamma,
                    std::uint64_t seed, Augmenter* augmenter) {
  // The augmenter tracks its own state across steps; wrap the env steps so it sees them.
  if (!augmenter) {
    return evaluate_policy([&net](const envs::Environment& e) { return neural::argmax(net.forward(observe(e))); }, env,
                           episodes, gamma, seed);
  }
  if (episodes <= 0) throw std::invalid_argument("evaluation needs at least one episode");
  auto e = envs::make_environment(envs::normalized(env));
  Rng env_rng = make_rng(seed, kEnvStream);
  EvalResult out;
  int successes = 0;
  double sum = 0.0;
  for (int k = 0; k < episodes; ++k) {
    e->reset(env_rng());
    augmenter->reset(*e);
    double g = 0.0, discount = 1.0;
    while (!e->terminal()) {
      const int a = neural::argmax(net.forward(observe(*e, augmenter)));
      augmenter->before_step(*e);
      const auto r = e->step(a);
      augmenter->after_step(*e, a, r);
      g += discount * r.reward;
      discount *= gamma;
    }
    successes += e->task_success() ? 1 : 0;
    out.returns.push_back(g);
    sum += g;
  }
  out.mean = sum / episodes;
  double ss = 0.0;
  for (double g : out.returns) ss += (g - out.mean) * (g - out.mean);
  out.stddev = std::sqrt(ss / episodes);
  out.success_rate = static_cast<double>(successes) / episodes;
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const RunMetrics& metrics, bool with_timing) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "episode,steps,return,discounted_return,success,epsilon,loss_mean,neural_ms_per_step,symbolic_ms_per_step\n";
  for (const auto& r : metrics.episodes) {
    out << r.episode << ',' << r.steps << ',' << format_double(r.ret) << ',' << format_double(r.discounted_return) << ','
        << (r.success ? 1 : 0) << ',' << format_double(r.epsilon) << ',' << format_double(r.loss_mean) << ','
        << format_double(with_timing ? r.neural_ms_per_step : 0.0) << ','
        << format_double(with_timing ? r.symbolic_ms_per_step : 0.0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EpisodeRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("episode,steps,return", 0) != 0) throw std::runtime_error(path.string() + ": not a metrics CSV");
  std::vector<EpisodeRecord> rows;
  std::uint64_t total = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    EpisodeRecord r;
    r.episode = std::stoi(cells[0]);
    r.steps = std::stoi(cells[1]);
    r.ret = std::stod(cells[2]);
    r.discounted_return = std::stod(cells[3]);
    r.success = cells[4] == "1";
    r.epsilon = std::stod(cells[5]);
    r.loss_mean = std::stod(cells[6]);
    r.neural_ms_per_step = std::stod(cells[7]);
    r.symbolic_ms_per_step = std::stod(cells[8]);
    total += static_cast<std::uint64_t>(r.steps);
    r.total_steps = total;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace nesy::agent
