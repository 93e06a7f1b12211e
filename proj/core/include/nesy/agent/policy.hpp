#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace nesy::agent {

using Rng = std::mt19937_64;

/// Rng seeded from (seed, stream) so that independent streams of one run do
/// not share state.
Rng make_rng(std::uint64_t seed, std::uint32_t stream);

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(Rng& rng);
/// Uniform integer in [0, n), unbiased.
int uniform_index(Rng& rng, int n);
/// Index k with probability weights[k] / sum(weights).
int sample_weighted(Rng& rng, std::span<const double> weights);

struct EpsilonSchedule {
  double initial = 1.0;   ///< epsilon_i
  double final = 0.05;    ///< epsilon_f
  double fraction = 0.1;  ///< epsilon_r, share of episodes spent decaying
  int episodes = 1000;    ///< E

  /// Throws std::invalid_argument unless 0 <= final <= initial <= 1,
  /// 0 < fraction <= 1 and episodes > 0.
  void validate() const;
};

/// eps_i - (eps_i - eps_f) * min(1, episode / (eps_r * E)).
double epsilon_at(const EpsilonSchedule& s, int episode);

enum class WeightMode {
  Raw,         ///< rho for suggested actions, 1 - rho otherwise
  Normalized,  ///< raw weights divided by their sum
};

/// Unnormalized weights: rho on suggested actions, 1 - rho elsewhere.
std::vector<double> raw_weights(int action_count, const std::set<int>& suggested, double rho);
/// raw_weights scaled to sum to one.
std::vector<double> action_weights(int action_count, const std::set<int>& suggested, double rho);

/// Uniform over all actions when nothing is suggested, otherwise sampled from
/// action_weights.
int sr_explore(Rng& rng, int action_count, const std::set<int>& suggested, double rho);

/// argmax_a Q(a) * (1 + eps * w_a), lowest index on ties. When every w_a is
/// equal the rescale cannot change the order and plain argmax is returned.
/// `negative_rescaled` is set when a negative Q-value was scaled by k_a != 1.
int sr_exploit(std::span<const double> q, const std::set<int>& suggested, double epsilon, double rho,
               WeightMode mode = WeightMode::Raw, bool* negative_rescaled = nullptr);

}  // namespace nesy::agent
