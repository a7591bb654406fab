#include "mofir/env.hpp"

#include <algorithm>

#include "json.hpp"

namespace mofir {

double utility_reward(int positives, int slate_size) {
  return static_cast<double>(positives) / static_cast<double>(slate_size);
}

double fairness_reward(int long_tail, int slate_size, double beta, FairnessReward variant) {
  const double share = static_cast<double>(long_tail) / static_cast<double>(slate_size);
  switch (variant) {
    case FairnessReward::kFloor:
      return std::max(share, beta);
    case FairnessReward::kCapped:
      return std::min(share, beta);
    case FairnessReward::kHingePenalty:
      return -std::max(beta - share, 0.0);
  }
  return share;
}

RecEnvironment::RecEnvironment(const SplitDataset& split, const ItemGrouping& grouping,
                               EnvConfig config)
    : split_(split), grouping_(grouping), config_(config) {
  if (config_.slate_size <= 0 || config_.history_length <= 0 || config_.max_steps <= 0) {
    throw EnvError("environment sizes must be positive");
  }
  if (grouping_.num_items() != split_.num_items) {
    throw EnvError("grouping covers " + std::to_string(grouping_.num_items()) +
                   " items but the split has " + std::to_string(split_.num_items));
  }
}

bool RecEnvironment::can_reset(UserId user, Phase phase) const {
  if (user < 0 || static_cast<std::size_t>(user) >= split_.num_users) return false;
  const auto u = static_cast<std::size_t>(user);
  if (!split_.kept[u]) return false;
  const auto& us = split_.users[u];
  const auto n = static_cast<std::size_t>(config_.history_length);
  if (us.train.size() < n) return false;
  if (phase == Phase::kTrain) return us.train.size() > n;
  return !us.test.empty();
}

UserState RecEnvironment::reset(UserId user, Phase phase) const {
  if (!can_reset(user, phase)) {
    throw EnvError("user " + std::to_string(user) + " has too few interactions for a " +
                   (phase == Phase::kTrain ? "training" : "test") + " episode");
  }
  const auto& us = split_.users[static_cast<std::size_t>(user)];
  const auto n = static_cast<std::ptrdiff_t>(config_.history_length);
  UserState state;
  state.user = user;
  if (phase == Phase::kTrain) {
    state.history.assign(us.train.begin(), us.train.begin() + n);
    state.pending.assign(us.train.begin() + n, us.train.end());
  } else {
    state.history.assign(us.train.end() - n, us.train.end());
    state.pending = us.test;
  }
  std::sort(state.pending.begin(), state.pending.end());
  state.pending.erase(std::unique(state.pending.begin(), state.pending.end()), state.pending.end());
  return state;
}

std::vector<UserId> RecEnvironment::eligible_users(Phase phase) const {
  std::vector<UserId> out;
  for (std::size_t u = 0; u < split_.num_users; ++u) {
    if (can_reset(static_cast<UserId>(u), phase)) out.push_back(static_cast<UserId>(u));
  }
  return out;
}

StepOutcome RecEnvironment::step(const UserState& state, std::span<const ItemId> action) const {
  const auto k = static_cast<std::size_t>(config_.slate_size);
  if (action.size() != k) {
    throw EnvError("action has " + std::to_string(action.size()) + " items, expected " +
                   std::to_string(k));
  }
  std::vector<ItemId> seen(action.begin(), action.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw EnvError("action contains a duplicate item");
  }
  if (seen.front() < 0 || static_cast<std::size_t>(seen.back()) >= split_.num_items) {
    throw EnvError("action contains an unknown item id");
  }

  StepOutcome out;
  out.next = state;
  out.next.steps = state.steps + 1;
  out.feedback.assign(k, false);
  int positives = 0;
  int long_tail = 0;
  for (std::size_t l = 0; l < k; ++l) {
    const ItemId item = action[l];
    if (grouping_.is_long_tail(item)) ++long_tail;
    auto it = std::lower_bound(out.next.pending.begin(), out.next.pending.end(), item);
    if (it != out.next.pending.end() && *it == item) {
      out.feedback[l] = true;
      ++positives;
      out.next.pending.erase(it);
      out.next.history.erase(out.next.history.begin());
      out.next.history.push_back(item);
    }
  }
  out.reward.utility = utility_reward(positives, config_.slate_size);
  out.reward.fairness =
      fairness_reward(long_tail, config_.slate_size, grouping_.beta, config_.fairness);
  out.terminal = out.next.pending.empty() || out.next.steps >= config_.max_steps;
  return out;
}

std::string trace_line(const UserState& before, std::span<const ItemId> items,
                       const StepOutcome& outcome) {
  nlohmann::ordered_json j;
  j["user"] = before.user;
  j["step"] = before.steps;
  j["items"] = std::vector<ItemId>(items.begin(), items.end());
  j["feedback"] = outcome.feedback;
  j["r_u"] = outcome.reward.utility;
  j["r_f"] = outcome.reward.fairness;
  return j.dump();
}

}  // namespace mofir
