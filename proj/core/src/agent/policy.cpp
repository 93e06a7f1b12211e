#include "nesy/agent/policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nesy/neural/qnetwork.hpp"

namespace nesy::agent {

Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_index(Rng& rng, int n) {
  if (n <= 0) throw std::invalid_argument("uniform_index needs n > 0");
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - Rng::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<int>(x % range);
}

int sample_weighted(Rng& rng, std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("sample_weighted on an empty distribution");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("weights must have a positive sum");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  // Rounding left u at the very top: take the last action with weight.
  for (std::size_t k = weights.size(); k-- > 0;)
    if (weights[k] > 0.0) return static_cast<int>(k);
  return static_cast<int>(weights.size() - 1);
}

void EpsilonSchedule::validate() const {
  if (!(0.0 <= final && final <= initial && initial <= 1.0)) {
    throw std::invalid_argument("epsilon schedule needs 0 <= eps_f <= eps_i <= 1");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("eps_r must lie in (0, 1]");
  if (episodes <= 0) throw std::invalid_argument("schedule episodes must be positive");
}

double epsilon_at(const EpsilonSchedule& s, int episode) {
  if (episode < 0) throw std::invalid_argument("negative episode index");
  const double progress = static_cast<double>(episode) / (s.fraction * static_cast<double>(s.episodes));
  if (progress >= 1.0) return s.final;  // 1 - (1 - eps_f) is not always eps_f in floating point
  return s.initial - (s.initial - s.final) * progress;
}

std::vector<double> raw_weights(int action_count, const std::set<int>& suggested, double rho) {
  if (action_count <= 0) throw std::invalid_argument("empty action set");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  std::vector<double> w(static_cast<std::size_t>(action_count), 1.0 - rho);
  for (int a : suggested) {
    if (a < 0 || a >= action_count) throw std::invalid_argument("suggested action " + std::to_string(a) + " out of range");
    w[static_cast<std::size_t>(a)] = rho;
  }
  return w;
}

std::vector<double> action_weights(int action_count, const std::set<int>& suggested, double rho) {
  auto w = raw_weights(action_count, suggested, rho);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total == 0.0) {
    // rho = 0 with every action suggested: all raw weights vanish.
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(action_count));
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

int sr_explore(Rng& rng, int action_count, const std::set<int>& suggested, double rho) {
  if (suggested.empty()) return uniform_index(rng, action_count);
  const auto w = action_weights(action_count, suggested, rho);
  return sample_weighted(rng, w);
}

int sr_exploit(std::span<const double> q, const std::set<int>& suggested, double epsilon, double rho, WeightMode mode,
               bool* negative_rescaled) {
  const int n = static_cast<int>(q.size());
  auto w = mode == WeightMode::Raw ? raw_weights(n, suggested, rho) : action_weights(n, suggested, rho);
  if (negative_rescaled) *negative_rescaled = false;
  if (epsilon == 0.0 || std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); })) {
    return neural::argmax(q);
  }
  std::vector<double> scaled(q.begin(), q.end());
  for (std::size_t a = 0; a < scaled.size(); ++a) {
    const double k = 1.0 + epsilon * w[a];
    if (negative_rescaled && scaled[a] < 0.0 && k != 1.0) *negative_rescaled = true;
    scaled[a] *= k;
  }
  return neural::argmax(scaled);
}

}  // namespace nesy::agent
