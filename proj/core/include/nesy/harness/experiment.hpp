#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nesy/agent/train.hpp"
#include "nesy/bridge/feature_map.hpp"
#include "nesy/harness/config.hpp"
#include "nesy/rm/reward_machine.hpp"

namespace nesy::harness {

/// Logical policy and reward machine named by a config, loaded and checked.
struct Resources {
  std::optional<bridge::PolicyAdvisor> advisor;
  std::optional<rm::RewardMachine> machine;
};

/// Parses the policy file, applies the action map file, rejects policies
/// whose heads the action map does not cover, and builds the reward machine
/// when an rm-dqn run is listed. Throws envs::ConfigError.
Resources load_resources(const ExperimentConfig& config);

/// One labelled curve: every seed of the config runs with `train`.
struct RunSpec {
  std::string label;
  agent::TrainConfig train;
};

struct TimingRow {
  double total_seconds = 0.0;
  double symbolic_seconds = 0.0;
  double increment_percent = 0.0;  ///< 100 * symbolic / (total - symbolic)
};

TimingRow timing_report(double total_seconds, double symbolic_seconds);
TimingRow timing_report(const agent::RunMetrics& metrics);

struct RunSummary {
  std::string label;
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;
  std::uint64_t total_steps = 0;
  std::uint64_t explore_steps = 0;
  std::uint64_t negative_rescales = 0;
  double wall_seconds = 0.0;
  double neural_seconds = 0.0;
  double symbolic_seconds = 0.0;
  double final_window_mean = 0.0;
  std::optional<agent::EvalResult> evaluation;
  std::string error;  ///< non-empty when the run aborted
  bool ok() const { return error.empty(); }
};

struct CurveRow {
  int episode = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double smoothed_mean = 0.0;
  double smoothed_stddev = 0.0;
};

struct StepRow {
  std::uint64_t step = 0;
  int seeds = 0;  ///< runs with at least one finished episode by `step`
  double mean = 0.0;
  double stddev = 0.0;
};

struct VariantReport {
  std::string label;
  std::vector<RunSummary> runs;
  double final_mean = 0.0;
  double final_stddev = 0.0;
  TimingRow timing;  ///< summed over seeds
};

struct AggregateReport {
  std::vector<VariantReport> variants;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
  const VariantReport& variant(const std::string& label) const;
};

/// Mean discounted return of the last `window` episodes (all when fewer).
double final_window_mean(const std::vector<agent::EpisodeRecord>& episodes, int window);

/// Per-episode mean/std of the discounted return across runs, truncated to the
/// shortest run, with a trailing rolling mean of both columns over `window`.
std::vector<CurveRow> aggregate_by_episode(const std::vector<std::vector<agent::EpisodeRecord>>& runs, int window);

/// At every multiple of `interval` up to `max_steps`: across runs, the
/// mean/std of each run's final_window_mean over the episodes finished by then.
std::vector<StepRow> aggregate_by_step(const std::vector<std::vector<agent::EpisodeRecord>>& runs,
                                       std::uint64_t interval, std::uint64_t max_steps, int window);

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows);
void write_step_csv(const std::filesystem::path& path, const std::vector<StepRow>& rows);

/// Runs every (spec, seed) pair on config.workers threads, writing under
/// `out`: <label>/seed_<k>.csv, .json summary, .qnet checkpoint with .qnet.json
/// sidecar, <label>/aggregate.csv, <label>/aggregate_by_step.csv, and
/// report.json. A failing run is reported, not fatal to the others.
AggregateReport run_specs(const ExperimentConfig& config, const Resources& resources, const std::vector<RunSpec>& specs,
                          const std::filesystem::path& out, std::ostream* log = nullptr);

/// Validates, then runs every algorithm of the config over every seed.
AggregateReport run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct Sweep {
  std::vector<double> rho;
  std::vector<std::pair<double, double>> epsilon;  ///< (eps_f, eps_r)
};

/// Parses "rho=0.5,0.8,0.95" and "eps=0.3:0.3,0.05:0.1" arguments. Empty
/// input gives rho {0.5, 0.8, 0.95} and eps {(0.3, 0.3), (0.05, 0.1), (0.1, 0.5)}.
Sweep parse_sweep(const std::vector<std::string>& args);

/// The four component variants (dqn, sr-exploration, sr-exploitation,
/// sr-dqn) at the base settings, plus sr-dqn curves labelled rho_<v> and
/// eps_<f>_<r> for the sweeps.
std::vector<RunSpec> ablation_specs(const ExperimentConfig& base, const Sweep& sweep);
AggregateReport ablation_suite(const ExperimentConfig& base, const Sweep& sweep, std::ostream* log = nullptr);

}  // namespace nesy::harness
