#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mofir/data.hpp"
#include "mofir/embed.hpp"
#include "mofir/nn/gru.hpp"

namespace mofir {

class EnvError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Phase { kTrain, kTest };

/// How the long-tail share of a slate is turned into the fairness reward.
///   kFloor        max(share, beta)          (default)
///   kCapped       min(share, beta)
///   kHingePenalty -max(beta - share, 0)
enum class FairnessReward { kFloor, kCapped, kHingePenalty };

struct EnvConfig {
  int slate_size = 10;     // K
  int history_length = 5;  // N
  int max_steps = 20;      // T
  FairnessReward fairness = FairnessReward::kFloor;
};

struct RewardVector {
  double utility = 0.0;
  double fairness = 0.0;

  std::array<double, 2> as_array() const { return {utility, fairness}; }
};

struct UserState {
  UserId user = 0;
  std::vector<ItemId> history;  // oldest first, always history_length long
  std::vector<ItemId> pending;  // sorted, unique
  int steps = 0;
};

struct StepOutcome {
  std::vector<bool> feedback;
  RewardVector reward;
  UserState next;
  bool terminal = false;
};

double utility_reward(int positives, int slate_size);
double fairness_reward(int long_tail, int slate_size, double beta, FairnessReward variant);

/// Offline replay of logged positives. Holds references to the split and
/// grouping, which must outlive it.
class RecEnvironment {
 public:
  RecEnvironment(const SplitDataset& split, const ItemGrouping& grouping, EnvConfig config = {});

  const EnvConfig& config() const { return config_; }
  const SplitDataset& split() const { return split_; }
  const ItemGrouping& grouping() const { return grouping_; }

  bool can_reset(UserId user, Phase phase) const;
  /// TRAIN: first N train items as history, the rest as pending positives.
  /// TEST: last N train items as history, test items as pending positives.
  UserState reset(UserId user, Phase phase) const;
  /// Users for which `reset(user, phase)` succeeds, ascending.
  std::vector<UserId> eligible_users(Phase phase) const;

  StepOutcome step(const UserState& state, std::span<const ItemId> action) const;

 private:
  const SplitDataset& split_;
  const ItemGrouping& grouping_;
  EnvConfig config_;
};

/// One JSON line {"user","step","items","feedback","r_u","r_f"} of an episode trace.
std::string trace_line(const UserState& before, std::span<const ItemId> items,
                       const StepOutcome& outcome);

/// Rows of `table` gathered for each id, as a (ids x dim) matrix.
template <typename Real>
nn::Matrix<Real> gather_rows(const MatrixF& table, std::span<const ItemId> ids) {
  nn::Matrix<Real> out(static_cast<nn::Index>(ids.size()), table.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= table.rows()) {
      throw EnvError("no embedding row for id " + std::to_string(ids[k]));
    }
    out.row(static_cast<nn::Index>(k)) = table.row(ids[k]).template cast<Real>();
  }
  return out;
}

/// Encodes a batch of states as [e_u ; GRU(history embeddings)]. `users[b]`
/// and `histories[b]` describe row b; every history has the same length.
template <typename Real>
nn::Matrix<Real> encode_states(const EmbeddingTable& embeddings, const nn::GruStack<Real>& gru,
                               const nn::ParamStore<Real>& params, std::span<const UserId> users,
                               std::span<const std::vector<ItemId>> histories,
                               typename nn::GruStack<Real>::Tape* tape = nullptr) {
  if (users.size() != histories.size() || users.empty()) {
    throw EnvError("encode_states: users and histories must be non-empty and aligned");
  }
  const std::size_t steps = histories.front().size();
  std::vector<nn::Matrix<Real>> seq(steps, nn::Matrix<Real>(static_cast<nn::Index>(users.size()),
                                                            embeddings.dim()));
  for (std::size_t b = 0; b < histories.size(); ++b) {
    if (histories[b].size() != steps) throw EnvError("encode_states: ragged histories");
    auto rows = gather_rows<Real>(embeddings.items, histories[b]);
    for (std::size_t t = 0; t < steps; ++t) {
      seq[t].row(static_cast<nn::Index>(b)) = rows.row(static_cast<nn::Index>(t));
    }
  }
  nn::Matrix<Real> hidden = gru.forward(params, seq, tape);
  nn::Matrix<Real> user_rows = gather_rows<Real>(embeddings.users, users);
  nn::Matrix<Real> state(user_rows.rows(), user_rows.cols() + hidden.cols());
  state << user_rows, hidden;
  return state;
}

template <typename Real>
nn::RowVector<Real> encode_state(const UserState& state, const EmbeddingTable& embeddings,
                                 const nn::GruStack<Real>& gru, const nn::ParamStore<Real>& params) {
  const UserId users[1] = {state.user};
  const std::vector<ItemId> histories[1] = {state.history};
  return encode_states<Real>(embeddings, gru, params, users, histories).row(0);
}

}  // namespace mofir
