#include "nesy/agent/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nesy::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(neural::Transition t) {
  if (!std::isfinite(t.reward)) throw std::invalid_argument("transition reward is not finite");
  if (t.action < 0) throw std::invalid_argument("transition action is negative");
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<neural::Transition> ReplayBuffer::sample(Rng& rng, std::size_t batch) const {
  if (data_.size() < batch) {
    throw std::logic_error("replay holds " + std::to_string(data_.size()) + " transitions, batch needs " +
                           std::to_string(batch));
  }
  std::vector<neural::Transition> out;
  out.reserve(batch);
  for (std::size_t k = 0; k < batch; ++k) out.push_back(data_[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(data_.size())))]);
  return out;
}

}  // namespace nesy::agent
