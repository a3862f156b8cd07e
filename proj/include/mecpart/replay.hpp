#pragma once

#include <cstddef>
#include <vector>

#include "mecpart/mlp.hpp"
#include "mecpart/system_model.hpp"

namespace mecpart {

/// Fixed-capacity ring of (state, normalized action) pairs; a push into a
/// full buffer overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(std::vector<double> state, std::vector<double> normalized_action);

  /// Uniform sample of `count` distinct entries. Throws ParameterError when
  /// fewer than `count` entries are stored.
  std::vector<TrainingSample> sample(std::size_t count, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return items_.size() == capacity_; }

  /// i-th oldest entry.
  const TrainingSample& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // slot of the next write once full
  std::vector<TrainingSample> items_;
};

}  // namespace mecpart
