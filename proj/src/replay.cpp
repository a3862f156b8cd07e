#include "mecpart/replay.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mecpart/error.hpp"

namespace mecpart {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ParameterError("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(std::vector<double> state, std::vector<double> normalized_action) {
  TrainingSample s{std::move(state), std::move(normalized_action)};
  if (items_.size() < capacity_) {
    items_.push_back(std::move(s));
    return;
  }
  items_[next_] = std::move(s);
  next_ = (next_ + 1) % capacity_;
}

const TrainingSample& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw ParameterError("replay index out of range");
  return full() ? items_[(next_ + i) % capacity_] : items_[i];
}

std::vector<TrainingSample> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (count > items_.size())
    throw ParameterError("cannot sample " + std::to_string(count) + " entries from a buffer holding " +
                         std::to_string(items_.size()));
  // Partial Fisher-Yates over slot indices.
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<TrainingSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(items_[idx[i]]);
  }
  return out;
}

}  // namespace mecpart
