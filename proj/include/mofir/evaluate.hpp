#pragma once

#include <functional>
#include <vector>

#include "mofir/agent/trainer.hpp"
#include "mofir/metrics.hpp"

namespace mofir {

/// Produces a ranked list of `length` distinct items for a TEST-phase state.
/// `excluded[i] == true` marks items that must not be recommended.
using ListPolicy =
    std::function<std::vector<ItemId>(const UserState& state, const std::vector<bool>& excluded,
                                      int length)>;

struct EvalOptions {
  MetricOptions metrics;
  /// Worker threads over users; results do not depend on this.
  int jobs = 1;
  /// Drop each user's training and validation items from the candidates.
  bool exclude_seen = true;
};

/// Resets every TEST-eligible user, asks `policy` for a list of max(ks)
/// items and averages the metrics against the user's test items.
EvalReport evaluate_policy(const RecEnvironment& env, const ListPolicy& policy,
                           const PreferenceVector& omega, const EvalOptions& options = {});

/// Ranked list from the actor's mean proposal: the K proposal rows are
/// matched greedily, repeated with a growing mask until `length` items exist.
std::vector<ItemId> rank_items(const Actor<float>& actor, const nn::RowVector<float>& state,
                               const PreferenceVector& omega, const MatrixF& items,
                               std::vector<bool> excluded, int length);

/// `evaluate_policy` with the agent acting greedily (explore = false).
EvalReport evaluate(const Agent& agent, const PreferenceVector& omega, const RecEnvironment& env,
                    const EmbeddingTable& embeddings, const EvalOptions& options = {});

}  // namespace mofir
