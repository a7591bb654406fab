#include "mofir/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace mofir {

EvalReport evaluate_policy(const RecEnvironment& env, const ListPolicy& policy,
                           const PreferenceVector& omega, const EvalOptions& options) {
  const auto& ks = options.metrics.ks;
  if (ks.empty()) throw std::invalid_argument("evaluate: no cut-offs given");
  const int length = *std::max_element(ks.begin(), ks.end());
  const auto users = env.eligible_users(Phase::kTest);
  if (users.empty()) throw std::invalid_argument("evaluate: no user can be evaluated");
  const auto& split = env.split();

  std::vector<std::vector<ItemId>> lists(users.size());
  std::vector<std::vector<ItemId>> relevant(users.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (std::size_t j = next++; j < users.size(); j = next++) {
        const UserId u = users[j];
        const UserState state = env.reset(u, Phase::kTest);
        std::vector<bool> excluded(split.num_items, false);
        const auto& us = split.users[static_cast<std::size_t>(u)];
        if (options.exclude_seen) {
          for (ItemId i : us.train) excluded[static_cast<std::size_t>(i)] = true;
          if (us.validation) excluded[static_cast<std::size_t>(*us.validation)] = true;
        }
        auto list = policy(state, excluded, length);
        if (static_cast<int>(list.size()) < length) {
          throw std::runtime_error("policy returned " + std::to_string(list.size()) +
                                   " items for user " + std::to_string(u));
        }
        lists[j] = std::move(list);
        relevant[j] = us.test;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = users.size();
    }
  };

  const int jobs = std::clamp(options.jobs, 1, static_cast<int>(users.size()));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate_metrics(lists, relevant, env.grouping(), options.metrics, omega);
}

std::vector<ItemId> rank_items(const Actor<float>& actor, const nn::RowVector<float>& state,
                               const PreferenceVector& omega, const MatrixF& items,
                               std::vector<bool> excluded, int length) {
  const PreferenceVector prefs[1] = {omega};
  const nn::Matrix<float> s = state;
  const nn::RowVector<float> mean = actor.mean(s, preference_rows<float>(prefs)).row(0);
  const auto& spec = actor.spec();
  const nn::Matrix<float> proposal =
      Eigen::Map<const nn::Matrix<float>>(mean.data(), spec.slate_size, spec.embedding_dim);

  std::vector<ItemId> out;
  while (static_cast<int>(out.size()) < length) {
    const auto rows = std::min<nn::Index>(proposal.rows(), length - static_cast<int>(out.size()));
    auto sel = select_items<float>(proposal.topRows(rows), items, excluded);
    out.insert(out.end(), sel.items.begin(), sel.items.end());
  }
  return out;
}

EvalReport evaluate(const Agent& agent, const PreferenceVector& omega, const RecEnvironment& env,
                    const EmbeddingTable& embeddings, const EvalOptions& options) {
  ListPolicy policy = [&](const UserState& state, const std::vector<bool>& excluded, int length) {
    const auto s =
        encode_state<float>(state, embeddings, agent.actor.encoder(), agent.actor.params);
    return rank_items(agent.actor, s, omega, embeddings.items, excluded, length);
  };
  return evaluate_policy(env, policy, omega, options);
}

}  // namespace mofir
