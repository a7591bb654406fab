#pragma once

#include <cstddef>
#include <vector>

#include "mofir/agent/preference.hpp"
#include "mofir/env.hpp"

namespace mofir {

struct Transition {
  UserId user = 0;
  std::vector<ItemId> history;
  std::vector<ItemId> next_history;
  std::vector<float> state;       // s_t as encoded during the rollout
  std::vector<float> next_state;  // s_{t+1}
  std::vector<float> proposal;    // flattened K x d matrix W
  std::vector<ItemId> items;
  RewardVector reward;
  bool terminal = false;
};

/// Fixed-capacity ring; once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  /// `count` distinct indices drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

}  // namespace mofir
