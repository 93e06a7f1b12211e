#pragma once

#include <cstddef>
#include <vector>

#include "nesy/agent/policy.hpp"
#include "nesy/neural/qnetwork.hpp"

namespace nesy::agent {

/// Fixed-capacity ring of transitions with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(neural::Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const neural::Transition& operator[](std::size_t k) const { return data_[k]; }

  /// Throws std::logic_error when fewer than `batch` transitions are stored.
  std::vector<neural::Transition> sample(Rng& rng, std::size_t batch) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<neural::Transition> data_;
};

}  // namespace nesy::agent
