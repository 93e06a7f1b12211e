#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace nesy::neural {

/// Indices of the 1-entries of a binary feature vector, ascending.
using Features = std::vector<std::uint32_t>;

/// Converts a 0/1 vector to its active indices. Throws std::invalid_argument
/// on any other value.
Features sparse_features(std::span<const double> dense);

struct Transition {
  Features state;
  int action = 0;
  double reward = 0.0;
  Features next_state;
  bool terminal = false;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArchitectureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fully connected ReLU network with an identity output layer.
///
/// Parameters live in one flat buffer, layer by layer: the weight matrix
/// stored input-major (w[i * out + o]) followed by the bias. Input-major rows
/// let the forward pass skip zero inputs and inactive ReLUs.
class QNetwork {
 public:
  QNetwork() = default;
  /// `layer_sizes` = {input, hidden..., actions}. Weights and biases are drawn
  /// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the output layer starts at zero
  /// unless `zero_output` is false.
  QNetwork(std::vector<std::size_t> layer_sizes, std::uint64_t seed, bool zero_output = true);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t layer_count() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Weight from input `in` to unit `out` of layer `layer` (0-based).
  double weight(std::size_t layer, std::size_t out, std::size_t in) const;
  void set_weight(std::size_t layer, std::size_t out, std::size_t in, double value);
  double bias(std::size_t layer, std::size_t out) const;
  void set_bias(std::size_t layer, std::size_t out, double value);

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward(const Features& input) const;
  std::vector<std::vector<double>> forward_batch(std::span<const Features> inputs) const;

  /// Mean Huber loss (delta = 1) of Q(x_k, a_k) against `targets`. When
  /// `grad` is non-empty it receives dLoss/dParameters (overwritten).
  double loss_and_gradient(std::span<const Features> inputs, std::span<const int> actions,
                           std::span<const double> targets, std::span<double> grad) const;

  bool all_finite() const;
  bool same_architecture(const QNetwork& other) const { return sizes_ == other.sizes_; }
  bool operator==(const QNetwork& other) const = default;

  /// Binary checkpoint: "NESYQNET", u32 version, u32 size count, u32 sizes,
  /// then per layer the out x in weights row-major and the bias, all
  /// little-endian f64.
  void save(const std::filesystem::path& path) const;
  static QNetwork load(const std::filesystem::path& path);

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + sizes_[layer] * sizes_[layer + 1]; }
  void layout();
  void check_input(std::size_t n) const;
  /// Runs the hidden stack on a sparse input, returning every activation vector.
  void activations(const Features& input, std::vector<std::vector<double>>& acts) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t parameter_count, AdamConfig config);

  void step(std::span<double> params, std::span<const double> grad);
  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

/// y = r for terminal transitions, r + gamma * max_a' Q_target(s', a') otherwise.
std::vector<double> td_targets(const QNetwork& target, std::span<const Transition> batch, double gamma);

/// One Huber/Adam step on the taken actions of `batch`; returns the batch loss
/// before the update. Throws NumericError on a non-finite loss or parameters.
double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition> batch, double gamma, Adam& optimizer);

/// Hard copy of the online parameters. Throws ArchitectureError on mismatch.
void sync_target(const QNetwork& net, QNetwork& target);

/// Lowest index among the maxima.
int argmax(std::span<const double> values);

}  // namespace nesy::neural
