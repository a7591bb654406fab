#include "mofir/agent/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace mofir {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  const std::size_t n = items_.size();
  if (count > n) {
    throw std::invalid_argument("cannot sample " + std::to_string(count) + " of " +
                                std::to_string(n) + " transitions");
  }
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t pick = dist(rng);
    if (std::find(out.begin(), out.end(), pick) != out.end()) pick = j;
    out.push_back(pick);
  }
  return out;
}

}  // namespace mofir
