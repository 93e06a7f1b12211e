#include "nesy/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace nesy::harness {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw envs::ConfigError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

json env_json(const envs::EnvConfig& e) {
  return {{"domain", e.domain},     {"task", e.task},           {"grid_size", e.grid_size},
          {"num_keys", e.num_keys}, {"max_steps", e.max_steps}, {"seed", e.seed}};
}

}  // namespace

Resources load_resources(const ExperimentConfig& config) {
  Resources r;
  bool needs_machine = false;
  for (const auto& a : config.algorithms) needs_machine |= a == "rm-dqn";

  if (!config.guidance.policy_file.empty()) {
    logic::Program program;
    try {
      program = logic::parse_program(read_file(config.guidance.policy_file));
    } catch (const logic::LogicError& e) {
      throw envs::ConfigError(config.guidance.policy_file.string() + ": " + e.what());
    }
    auto bridge = bridge::builtin_bridge(config.env.domain);
    if (!config.guidance.action_map_file.empty()) {
      auto env = envs::make_environment(envs::normalized(config.env));
      logic::ConstantDomain constants = bridge.constants;
      constants.insert(program.constants().begin(), program.constants().end());
      bridge.action_map = bridge::load_action_map(config.guidance.action_map_file, env->action_names(), constants);
      if (bridge.action_map.domain_id() != config.env.domain) {
        throw envs::ConfigError("action map is for domain " + bridge.action_map.domain_id());
      }
    }
    const auto report = bridge::validate_surjective(bridge, program);
    if (!report.ok()) {
      std::string list;
      for (const auto& a : report.unmapped) list += (list.empty() ? "" : ", ") + logic::to_string(a);
      throw envs::ConfigError("logical policy produces atoms without an MDP action: " + list);
    }
    r.advisor.emplace(std::move(program), std::move(bridge),
                      config.guidance.precompute_grounding ? bridge::PolicyAdvisor::Grounding::Precomputed
                                                           : bridge::PolicyAdvisor::Grounding::OnTheFly);
  }
  if (needs_machine) {
    r.machine = config.reward_machine.file.empty() ? rm::builtin_machine(config.env, config.reward_machine.bonus)
                                                   : rm::load_machine(config.reward_machine.file);
  }
  return r;
}

TimingRow timing_report(double total_seconds, double symbolic_seconds) {
  TimingRow row{total_seconds, symbolic_seconds, 0.0};
  const double rest = total_seconds - symbolic_seconds;
  if (symbolic_seconds > 0.0 && rest > 0.0) row.increment_percent = 100.0 * symbolic_seconds / rest;
  return row;
}

TimingRow timing_report(const agent::RunMetrics& m) { return timing_report(m.wall_seconds, m.symbolic_seconds); }

const VariantReport& AggregateReport::variant(const std::string& label) const {
  for (const auto& v : variants)
    if (v.label == label) return v;
  throw std::out_of_range("no variant '" + label + "' in report");
}

double final_window_mean(const std::vector<agent::EpisodeRecord>& episodes, int window) {
  if (episodes.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(episodes.size(), static_cast<std::size_t>(std::max(window, 1)));
  double s = 0.0;
  for (std::size_t k = episodes.size() - n; k < episodes.size(); ++k) s += episodes[k].discounted_return;
  return s / static_cast<double>(n);
}

std::vector<CurveRow> aggregate_by_episode(const std::vector<std::vector<agent::EpisodeRecord>>& runs, int window) {
  std::vector<CurveRow> rows;
  if (runs.empty()) return rows;
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  std::vector<double> col(runs.size());
  for (std::size_t e = 0; e < len; ++e) {
    for (std::size_t k = 0; k < runs.size(); ++k) col[k] = runs[k][e].discounted_return;
    rows.push_back({static_cast<int>(e), mean_of(col), stddev_of(col), 0.0, 0.0});
  }
  const std::size_t w = static_cast<std::size_t>(std::max(window, 1));
  double sm = 0.0, ss = 0.0;
  for (std::size_t e = 0; e < rows.size(); ++e) {
    sm += rows[e].mean;
    ss += rows[e].stddev;
    if (e >= w) {
      sm -= rows[e - w].mean;
      ss -= rows[e - w].stddev;
    }
    const double n = static_cast<double>(std::min(e + 1, w));
    rows[e].smoothed_mean = sm / n;
    rows[e].smoothed_stddev = ss / n;
  }
  return rows;
}

std::vector<StepRow> aggregate_by_step(const std::vector<std::vector<agent::EpisodeRecord>>& runs, std::uint64_t interval,
                                       std::uint64_t max_steps, int window) {
  std::vector<StepRow> rows;
  if (interval == 0) throw std::invalid_argument("step interval must be positive");
  std::vector<std::size_t> cursor(runs.size(), 0);
  for (std::uint64_t step = interval; step <= max_steps; step += interval) {
    std::vector<double> values;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      auto& c = cursor[k];
      while (c < runs[k].size() && runs[k][c].total_steps <= step) ++c;
      if (c == 0) continue;
      std::vector<agent::EpisodeRecord> done(runs[k].begin(), runs[k].begin() + static_cast<std::ptrdiff_t>(c));
      values.push_back(final_window_mean(done, window));
    }
    rows.push_back({step, static_cast<int>(values.size()), mean_of(values), stddev_of(values)});
  }
  return rows;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "episode,mean,std,smoothed_mean,smoothed_std\n";
  for (const auto& r : rows) {
    out << r.episode << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << ',' << fmt(r.smoothed_mean) << ','
        << fmt(r.smoothed_stddev) << '\n';
  }
  write_text(path, out.str());
}

void write_step_csv(const std::filesystem::path& path, const std::vector<StepRow>& rows) {
  std::ostringstream out;
  out << "step,seeds,mean,std\n";
  for (const auto& r : rows) out << r.step << ',' << r.seeds << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << '\n';
  write_text(path, out.str());
}

AggregateReport run_specs(const ExperimentConfig& config, const Resources& resources, const std::vector<RunSpec>& specs,
                          const std::filesystem::path& out, std::ostream* log) {
  struct Job {
    std::size_t spec;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto v = specs[s].train.variant;
    if ((agent::uses_sr_exploration(v) || agent::uses_sr_exploitation(v)) && !resources.advisor) {
      throw envs::ConfigError(specs[s].label + " needs a logical policy");
    }
    if (v == agent::Variant::RMDQN && !resources.machine) throw envs::ConfigError(specs[s].label + " needs a reward machine");
    std::filesystem::create_directories(out / specs[s].label);
    for (std::size_t k = 0; k < config.seeds.size(); ++k) jobs.push_back({s, k});
  }
  write_text(out / "config.json", config_to_json(config) + "\n");

  std::vector<std::vector<RunSummary>> summaries(specs.size(), std::vector<RunSummary>(config.seeds.size()));
  std::vector<std::vector<std::vector<agent::EpisodeRecord>>> curves(
      specs.size(), std::vector<std::vector<agent::EpisodeRecord>>(config.seeds.size()));
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto& job = jobs[j];
      const auto& spec = specs[job.spec];
      const auto seed = config.seeds[job.seed_index];
      auto& summary = summaries[job.spec][job.seed_index];
      summary.label = spec.label;
      summary.variant = agent::variant_name(spec.train.variant);
      summary.seed = seed;
      const auto stem = out / spec.label / ("seed_" + std::to_string(seed));
      try {
        agent::RunMetrics m;
        std::optional<rm::MachineAugmenter> augmenter;
        if (spec.train.variant == agent::Variant::RMDQN) {
          augmenter.emplace(*resources.machine);
          m = agent::train(spec.train, seed, nullptr, &*augmenter);
        } else {
          m = agent::train(spec.train, seed, resources.advisor ? &*resources.advisor : nullptr);
        }
        agent::write_metrics_csv(stem.string() + ".csv", m, config.record_timing);
        curves[job.spec][job.seed_index] = m.episodes;

        summary.episodes = m.episodes.size();
        summary.total_steps = m.total_steps;
        summary.explore_steps = m.explore_steps;
        summary.negative_rescales = m.negative_rescales;
        if (config.record_timing) {
          summary.wall_seconds = m.wall_seconds;
          summary.neural_seconds = m.neural_seconds;
          summary.symbolic_seconds = m.symbolic_seconds;
        }
        summary.final_window_mean = final_window_mean(m.episodes, config.final_window);
        if (config.eval_episodes > 0) {
          summary.evaluation = agent::evaluate(m.network, spec.train.env, config.eval_episodes, spec.train.hyper.gamma,
                                               seed + 0x9e3779b97f4a7c15ULL, augmenter ? &*augmenter : nullptr);
        }

        json js{{"label", summary.label},
                {"variant", summary.variant},
                {"seed", seed},
                {"episodes", summary.episodes},
                {"total_steps", summary.total_steps},
                {"explore_steps", summary.explore_steps},
                {"negative_rescales", summary.negative_rescales},
                {"wall_seconds", summary.wall_seconds},
                {"neural_seconds", summary.neural_seconds},
                {"symbolic_seconds", summary.symbolic_seconds},
                {"final_window_mean", summary.final_window_mean}};
        if (summary.evaluation) {
          js["evaluation"] = {{"episodes", config.eval_episodes},
                              {"mean", summary.evaluation->mean},
                              {"std", summary.evaluation->stddev},
                              {"success_rate", summary.evaluation->success_rate}};
        }
        write_text(stem.string() + ".json", js.dump(2) + "\n");

        if (config.save_checkpoints) {
          m.network.save(stem.string() + ".qnet");
          json side{{"variant", summary.variant},
                    {"seed", seed},
                    {"env", env_json(spec.train.env)},
                    {"layer_sizes", m.network.layer_sizes()},
                    {"gamma", spec.train.hyper.gamma}};
          if (augmenter) side["reward_machine"] = json::parse(rm::machine_to_json_text(augmenter->machine()));
          write_text(stem.string() + ".qnet.json", side.dump(2) + "\n");
        }
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << spec.label << " seed " << seed << ": " << summary.episodes << " episodes, " << summary.total_steps
               << " steps, final-window return " << short_number(summary.final_window_mean) << '\n';
        }
      } catch (const std::exception& e) {
        summary.error = e.what();
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << spec.label << " seed " << seed << " FAILED: " << e.what() << '\n';
        }
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AggregateReport report;
  json doc{{"name", config.name}, {"variants", json::array()}};
  for (std::size_t s = 0; s < specs.size(); ++s) {
    VariantReport vr;
    vr.label = specs[s].label;
    vr.runs = summaries[s];
    std::vector<double> finals;
    double wall = 0.0, symbolic = 0.0;
    bool complete = true;
    for (const auto& r : vr.runs) {
      if (!r.ok()) {
        complete = false;
        report.failures.push_back(r.label + " seed " + std::to_string(r.seed) + ": " + r.error);
        continue;
      }
      finals.push_back(r.final_window_mean);
      wall += r.wall_seconds;
      symbolic += r.symbolic_seconds;
    }
    vr.final_mean = mean_of(finals);
    vr.final_stddev = stddev_of(finals);
    vr.timing = timing_report(wall, symbolic);
    if (complete) {
      write_curve_csv(out / vr.label / "aggregate.csv", aggregate_by_episode(curves[s], config.smoothing_window));
      const auto max_steps = specs[s].train.hyper.max_total_steps;
      write_step_csv(out / vr.label / "aggregate_by_step.csv",
                     aggregate_by_step(curves[s], std::max<std::uint64_t>(1, max_steps / 100), max_steps,
                                       config.smoothing_window));
    }
    doc["variants"].push_back({{"label", vr.label},
                               {"variant", agent::variant_name(specs[s].train.variant)},
                               {"seeds", config.seeds},
                               {"complete", complete},
                               {"final_window_mean", vr.final_mean},
                               {"final_window_std", vr.final_stddev},
                               {"wall_seconds", vr.timing.total_seconds},
                               {"symbolic_seconds", vr.timing.symbolic_seconds},
                               {"increment_percent", vr.timing.increment_percent}});
    report.variants.push_back(std::move(vr));
  }
  doc["failures"] = report.failures;
  write_text(out / "report.json", doc.dump(2) + "\n");
  return report;
}

AggregateReport run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto resources = load_resources(config);
  std::vector<RunSpec> specs;
  for (const auto& a : config.algorithms) specs.push_back({a, train_config_for(config, a)});
  return run_specs(config, resources, specs, config.output_dir, log);
}

Sweep parse_sweep(const std::vector<std::string>& args) {
  Sweep s;
  bool saw_rho = false, saw_eps = false;
  for (const auto& arg : args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw envs::ConfigError("sweep '" + arg + "' must look like name=v1,v2");
    const auto name = arg.substr(0, eq);
    std::stringstream list(arg.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      try {
        if (name == "rho") {
          saw_rho = true;
          const double v = std::stod(item);
          if (!(v >= 0.0 && v < 1.0)) throw envs::ConfigError("rho sweep value " + item + " outside [0, 1)");
          s.rho.push_back(v);
        } else if (name == "eps") {
          saw_eps = true;
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw envs::ConfigError("eps sweep values look like eps_f:eps_r");
          s.epsilon.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } else {
          throw envs::ConfigError("unknown sweep '" + name + "' (expected rho or eps)");
        }
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const envs::ConfigError*>(&e)) throw;
        throw envs::ConfigError("bad sweep value '" + item + "'");
      }
    }
  }
  if (!saw_rho && !saw_eps) {
    s.rho = {0.5, 0.8, 0.95};
    s.epsilon = {{0.3, 0.3}, {0.05, 0.1}, {0.1, 0.5}};
  }
  return s;
}

std::vector<RunSpec> ablation_specs(const ExperimentConfig& base, const Sweep& sweep) {
  auto cfg = base;
  cfg.guidance.use_sr_exploration = true;
  cfg.guidance.use_sr_exploitation = true;
  std::vector<RunSpec> specs;
  for (const char* v : {"dqn", "sr-exploration", "sr-exploitation", "sr-dqn"}) specs.push_back({v, train_config_for(cfg, v)});
  for (double rho : sweep.rho) {
    auto t = train_config_for(cfg, "sr-dqn");
    t.guidance.rho = rho;
    specs.push_back({"rho_" + short_number(rho), t});
  }
  for (const auto& [f, r] : sweep.epsilon) {
    auto t = train_config_for(cfg, "sr-dqn");
    t.schedule.final = f;
    t.schedule.fraction = r;
    try {
      t.schedule.validate();
    } catch (const std::invalid_argument& e) {
      throw envs::ConfigError(std::string("eps sweep: ") + e.what());
    }
    specs.push_back({"eps_" + short_number(f) + "_" + short_number(r), t});
  }
  return specs;
}

AggregateReport ablation_suite(const ExperimentConfig& base, const Sweep& sweep, std::ostream* log) {
  base.validate();
  if (base.guidance.policy_file.empty()) throw envs::ConfigError("ablation needs guidance.policy_file");
  const auto resources = load_resources(base);
  return run_specs(base, resources, ablation_specs(base, sweep), base.output_dir / "ablation", log);
}

}  // namespace nesy::harness
