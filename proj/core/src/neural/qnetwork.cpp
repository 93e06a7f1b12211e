#include "nesy/neural/qnetwork.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace nesy::neural {

namespace {

constexpr std::array<char, 8> kMagic{'N', 'E', 'S', 'Y', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

double huber(double d) { return std::abs(d) <= 1.0 ? 0.5 * d * d : std::abs(d) - 0.5; }
double huber_slope(double d) { return std::clamp(d, -1.0, 1.0); }

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = std::endian::native == std::endian::little ? raw[i] : raw[sizeof(T) - 1 - i];
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw std::runtime_error("checkpoint truncated");
  if constexpr (std::endian::native != std::endian::little) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

Features sparse_features(std::span<const double> dense) {
  Features f;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] == 1.0) {
      f.push_back(static_cast<std::uint32_t>(i));
    } else if (dense[i] != 0.0) {
      throw std::invalid_argument("observation entry " + std::to_string(i) + " is not binary");
    }
  }
  return f;
}

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes, std::uint64_t seed, bool zero_output)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ArchitectureError("a network needs an input and an output layer");
  for (auto s : sizes_)
    if (s == 0) throw ArchitectureError("layer sizes must be positive");
  layout();

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x716e6574u};
  std::mt19937_64 rng(seq);
  for (std::size_t l = 0; l < layer_count(); ++l) {
    if (zero_output && l + 1 == layer_count()) break;
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t end = bias_offset(l) + sizes_[l + 1];
    for (std::size_t k = weight_offset(l); k < end; ++k) params_[k] = u(rng);
  }
}

void QNetwork::layout() {
  offsets_.clear();
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

double QNetwork::weight(std::size_t layer, std::size_t out, std::size_t in) const {
  return params_.at(weight_offset(layer) + in * sizes_[layer + 1] + out);
}

void QNetwork::set_weight(std::size_t layer, std::size_t out, std::size_t in, double value) {
  params_.at(weight_offset(layer) + in * sizes_[layer + 1] + out) = value;
}

double QNetwork::bias(std::size_t layer, std::size_t out) const { return params_.at(bias_offset(layer) + out); }

void QNetwork::set_bias(std::size_t layer, std::size_t out, double value) { params_.at(bias_offset(layer) + out) = value; }

void QNetwork::check_input(std::size_t n) const {
  if (sizes_.empty()) throw ArchitectureError("network is empty");
  if (n != input_size()) {
    throw ArchitectureError("input has " + std::to_string(n) + " features, network expects " +
                            std::to_string(input_size()));
  }
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  check_input(input.size());
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t n_in = sizes_[l], n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    std::vector<double> y(params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l)),
                          params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l) + n_out));
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* row = w + i * n_out;
      for (std::size_t o = 0; o < n_out; ++o) y[o] += xi * row[o];
    }
    if (l + 1 < layer_count())
      for (auto& v : y) v = std::max(v, 0.0);
    x = std::move(y);
  }
  return x;
}

void QNetwork::activations(const Features& input, std::vector<std::vector<double>>& acts) const {
  acts.resize(layer_count());
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const std::size_t n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    auto& y = acts[l];
    y.assign(params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l)),
             params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l) + n_out));
    if (l == 0) {
      for (auto i : input) {
        const double* row = w + static_cast<std::size_t>(i) * n_out;
        for (std::size_t o = 0; o < n_out; ++o) y[o] += row[o];
      }
    } else {
      const auto& x = acts[l - 1];
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = w + i * n_out;
        for (std::size_t o = 0; o < n_out; ++o) y[o] += xi * row[o];
      }
    }
    if (l + 1 < layer_count())
      for (auto& v : y) v = std::max(v, 0.0);
  }
}

std::vector<double> QNetwork::forward(const Features& input) const {
  if (sizes_.empty()) throw ArchitectureError("network is empty");
  for (auto i : input) {
    if (i >= input_size()) throw ArchitectureError("feature index " + std::to_string(i) + " out of range");
  }
  std::vector<std::vector<double>> acts;
  activations(input, acts);
  return std::move(acts.back());
}

std::vector<std::vector<double>> QNetwork::forward_batch(std::span<const Features> inputs) const {
  std::vector<std::vector<double>> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) out.push_back(forward(x));
  return out;
}

double QNetwork::loss_and_gradient(std::span<const Features> inputs, std::span<const int> actions,
                                   std::span<const double> targets, std::span<double> grad) const {
  if (inputs.empty()) throw std::invalid_argument("empty batch");
  if (actions.size() != inputs.size() || targets.size() != inputs.size()) {
    throw std::invalid_argument("batch inputs, actions and targets differ in length");
  }
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());
  const std::size_t L = layer_count();

  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  double loss = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (auto i : inputs[k]) {
      if (i >= input_size()) throw ArchitectureError("feature index " + std::to_string(i) + " out of range");
    }
    const int a = actions[k];
    if (a < 0 || static_cast<std::size_t>(a) >= output_size()) throw std::invalid_argument("action index out of range");
    activations(inputs[k], acts);
    const double d = acts.back()[static_cast<std::size_t>(a)] - targets[k];
    loss += huber(d) * scale;
    if (!want_grad) continue;

    // Only the taken action's output carries error.
    delta.assign(output_size(), 0.0);
    delta[static_cast<std::size_t>(a)] = huber_slope(d) * scale;
    for (std::size_t l = L; l-- > 0;) {
      const std::size_t n_out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset(l);
      double* gw = grad.data() + weight_offset(l);
      double* gb = grad.data() + bias_offset(l);
      for (std::size_t o = 0; o < n_out; ++o) gb[o] += delta[o];
      if (l == 0) {
        for (auto i : inputs[k]) {
          double* row = gw + static_cast<std::size_t>(i) * n_out;
          for (std::size_t o = 0; o < n_out; ++o) row[o] += delta[o];
        }
        break;
      }
      const auto& x = acts[l - 1];
      prev_delta.assign(x.size(), 0.0);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) continue;  // inactive ReLU: no gradient through, no weight gradient
        double* grow = gw + i * n_out;
        const double* wrow = w + i * n_out;
        double s = 0.0;
        for (std::size_t o = 0; o < n_out; ++o) {
          grow[o] += x[i] * delta[o];
          s += wrow[o] * delta[o];
        }
        prev_delta[i] = s;
      }
      delta.swap(prev_delta);
    }
  }
  return loss;
}

bool QNetwork::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

void QNetwork::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sizes_.size()));
  for (auto s : sizes_) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < layer_count(); ++l) {
    for (std::size_t o = 0; o < sizes_[l + 1]; ++o)
      for (std::size_t i = 0; i < sizes_[l]; ++i) put_le<double>(out, weight(l, o, i));
    for (std::size_t o = 0; o < sizes_[l + 1]; ++o) put_le<double>(out, bias(l, o));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

QNetwork QNetwork::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a Q-network checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(in);
  if (count < 2 || count > 64) throw std::runtime_error("corrupt checkpoint layer count");
  QNetwork net;
  for (std::uint32_t k = 0; k < count; ++k) net.sizes_.push_back(get_le<std::uint32_t>(in));
  net.layout();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (std::size_t o = 0; o < net.sizes_[l + 1]; ++o)
      for (std::size_t i = 0; i < net.sizes_[l]; ++i) net.set_weight(l, o, i, get_le<double>(in));
    for (std::size_t o = 0; o < net.sizes_[l + 1]; ++o) net.set_bias(l, o, get_le<double>(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in checkpoint");
  return net;
}

// ---------------------------------------------------------------------------

Adam::Adam(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("optimizer shape mismatch");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step = config_.learning_rate * std::sqrt(c2) / c1;
  const double eps = config_.epsilon * std::sqrt(c2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k];
    m_[k] = b1 * m_[k] + (1.0 - b1) * g;
    v_[k] = b2 * v_[k] + (1.0 - b2) * g * g;
    params[k] -= step * m_[k] / (std::sqrt(v_[k]) + eps);
  }
}

std::vector<double> td_targets(const QNetwork& target, std::span<const Transition> batch, double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const auto& t : batch) {
    if (t.terminal) {
      y.push_back(t.reward);
    } else {
      const auto q = target.forward(t.next_state);
      y.push_back(t.reward + gamma * *std::max_element(q.begin(), q.end()));
    }
  }
  return y;
}

double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition> batch, double gamma, Adam& optimizer) {
  if (batch.empty()) throw std::invalid_argument("train_step on an empty batch");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!net.same_architecture(target)) throw ArchitectureError("online and target networks differ");

  const auto y = td_targets(target, batch, gamma);
  std::vector<Features> xs;
  std::vector<int> actions;
  xs.reserve(batch.size());
  actions.reserve(batch.size());
  for (const auto& t : batch) {
    xs.push_back(t.state);
    actions.push_back(t.action);
  }
  thread_local std::vector<double> grad;
  grad.resize(net.parameter_count());
  const double loss = net.loss_and_gradient(xs, actions, y, grad);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite loss " << loss << " after " << optimizer.steps() << " updates (batch of " << batch.size() << ")";
    throw NumericError(msg.str());
  }
  optimizer.step(net.parameters(), grad);
  if (!net.all_finite()) {
    throw NumericError("non-finite parameter after update " + std::to_string(optimizer.steps()));
  }
  return loss;
}

void sync_target(const QNetwork& net, QNetwork& target) {
  if (!net.same_architecture(target)) throw ArchitectureError("cannot sync networks of different shape");
  std::copy(net.parameters().begin(), net.parameters().end(), target.parameters().begin());
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return static_cast<int>(best);
}

}  // namespace nesy::neural
