#include "mofir/agent/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mofir/metrics.hpp"
#include "mofir/nn/optim.hpp"

namespace mofir {
namespace {

void append_store(std::vector<Record>& out, const std::string& prefix,
                  const nn::ParamStore<float>& store, bool with_optimizer) {
  for (const auto& p : store) {
    out.push_back({prefix + "/" + p.name,
                   std::vector<float>(p.value.data(), p.value.data() + p.value.size())});
  }
  if (!with_optimizer) return;
  for (const auto& p : store) {
    out.push_back({prefix + ".adam_m/" + p.name,
                   std::vector<float>(p.adam_m.data(), p.adam_m.data() + p.adam_m.size())});
    out.push_back({prefix + ".adam_v/" + p.name,
                   std::vector<float>(p.adam_v.data(), p.adam_v.data() + p.adam_v.size())});
  }
  out.push_back({prefix + ".adam_steps", {static_cast<float>(store.adam_steps())}});
}

void restore_store(std::span<const Record> records, const std::string& prefix,
                   nn::ParamStore<float>& store, bool with_optimizer) {
  auto copy_into = [&](const std::string& name, nn::Matrix<float>& dst) {
    const auto& r = find_record(records, name, static_cast<std::size_t>(dst.size()));
    std::copy(r.values.begin(), r.values.end(), dst.data());
  };
  for (auto& p : store) {
    copy_into(prefix + "/" + p.name, p.value);
    if (with_optimizer) {
      copy_into(prefix + ".adam_m/" + p.name, p.adam_m);
      copy_into(prefix + ".adam_v/" + p.name, p.adam_v);
    }
    p.grad.setZero();
  }
  if (with_optimizer) {
    store.set_adam_steps(
        static_cast<std::int64_t>(find_record(records, prefix + ".adam_steps", 1).values[0]));
  }
  store.touch();
}

UpdateBatch<float> gather_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices,
                                int action_dim) {
  UpdateBatch<float> b;
  const auto n = static_cast<nn::Index>(indices.size());
  b.actions.resize(n, action_dim);
  b.rewards.resize(n, kNumObjectives);
  for (nn::Index j = 0; j < n; ++j) {
    const Transition& t = buffer[indices[static_cast<std::size_t>(j)]];
    b.users.push_back(t.user);
    b.histories.push_back(t.history);
    b.next_histories.push_back(t.next_history);
    b.actions.row(j) = Eigen::Map<const nn::RowVector<float>>(t.proposal.data(), action_dim);
    b.rewards(j, 0) = static_cast<float>(t.reward.utility);
    b.rewards(j, 1) = static_cast<float>(t.reward.fairness);
    b.terminal.push_back(t.terminal);
  }
  return b;
}

}  // namespace

Agent::Agent(const NetworkSpec& spec, std::uint64_t seed)
    : actor(spec), critic(spec), spec_(spec) {
  Rng rng(seed);
  actor.init(rng);
  critic.init(rng);
  target_actor = actor;
  target_critic = critic;
}

std::vector<Record> Agent::to_records() const {
  std::vector<Record> out;
  out.push_back({"meta/spec", spec_.signature()});
  append_store(out, "actor", actor.params, true);
  append_store(out, "critic", critic.params, true);
  append_store(out, "target_actor", target_actor.params, false);
  append_store(out, "target_critic", target_critic.params, false);
  return out;
}

void Agent::from_records(std::span<const Record> records) {
  const auto sig = spec_.signature();
  const auto& meta = find_record(records, "meta/spec");
  if (meta.values != sig) {
    throw CheckpointError(CheckpointError::Kind::kSchema,
                          "checkpoint was written for a different network architecture");
  }
  restore_store(records, "actor", actor.params, true);
  restore_store(records, "critic", critic.params, true);
  restore_store(records, "target_actor", target_actor.params, false);
  restore_store(records, "target_critic", target_critic.params, false);
}

void Agent::save(const std::filesystem::path& path) const { write_records(path, to_records()); }

void Agent::load(const std::filesystem::path& path) { from_records(read_records(path)); }

std::pair<double, double> update_agent(Agent& agent, const ReplayBuffer& buffer,
                                       const PreferenceVector& omega0,
                                       const EmbeddingTable& embeddings, const TrainConfig& config,
                                       Rng& rng) {
  const auto indices = buffer.sample_indices(static_cast<std::size_t>(config.batch_size), rng);
  const UpdateBatch<float> batch = gather_batch(buffer, indices, agent.spec().action_dim());

  std::vector<PreferenceVector> prefs;
  for (int i = 0; i < config.preference_samples; ++i) prefs.push_back(sample_preference(rng));
  prefs.push_back(omega0);

  const nn::Matrix<float> states = encode_states<float>(
      embeddings, agent.actor.encoder(), agent.actor.params, batch.users, batch.histories);
  const nn::Matrix<float> targets = critic_targets<float>(
      batch, prefs, agent.target_actor, agent.target_critic, embeddings, config.gamma);

  agent.critic.params.zero_grad();
  const double loss = critic_loss_and_grad(agent.critic, states, batch, prefs, targets);
  nn::adam_step(agent.critic.params, {config.critic_lr});

  agent.actor.params.zero_grad();
  const double objective =
      actor_objective_and_grad(agent.actor, agent.critic, batch, prefs, embeddings);
  nn::adam_step(agent.actor.params, {config.actor_lr});

  nn::soft_update(agent.target_critic.params, agent.critic.params, config.tau);
  nn::soft_update(agent.target_actor.params, agent.actor.params, config.tau);
  return {loss, objective};
}

std::vector<EpisodeLog> train(Agent& agent, const RecEnvironment& env,
                              const EmbeddingTable& embeddings, const TrainConfig& config,
                              const EpisodeCallback& on_episode) {
  if (config.episodes < 0 || config.batch_size <= 0 || config.preference_samples < 0) {
    throw std::invalid_argument("train: invalid episode, batch or preference counts");
  }
  if (agent.spec().slate_size != env.config().slate_size ||
      agent.spec().history_length != env.config().history_length ||
      agent.spec().embedding_dim != embeddings.dim()) {
    throw std::invalid_argument("train: agent, environment and embeddings disagree on K, N or d");
  }
  const auto users = env.eligible_users(Phase::kTrain);
  if (users.empty()) throw std::invalid_argument("train: no user has enough training interactions");

  Rng rng(config.seed);
  ReplayBuffer buffer(config.buffer_capacity);
  const std::size_t ready = std::max(config.warmup_transitions,
                                     static_cast<std::size_t>(config.batch_size));
  std::uniform_int_distribution<std::size_t> pick_user(0, users.size() - 1);
  std::vector<EpisodeLog> log;

  for (int episode = 0; episode < config.episodes; ++episode) {
    const UserId user = users[pick_user(rng)];
    const PreferenceVector omega0 = sample_preference(rng);
    const double progress =
        config.episodes > 1 ? static_cast<double>(episode) / (config.episodes - 1) : 0.0;
    const double noise =
        config.exploration_start + (config.exploration_end - config.exploration_start) * progress;

    UserState state = env.reset(user, Phase::kTrain);
    nn::RowVector<float> s =
        encode_state<float>(state, embeddings, agent.actor.encoder(), agent.actor.params);
    std::vector<RewardVector> rewards;
    while (true) {
      std::vector<bool> mask(embeddings.num_items(), false);
      auto a = act(agent.actor, s, omega0, embeddings.items, /*explore=*/true, mask, &rng, noise);
      StepOutcome out = env.step(state, a.items);
      nn::RowVector<float> s_next =
          encode_state<float>(out.next, embeddings, agent.actor.encoder(), agent.actor.params);

      Transition t;
      t.user = user;
      t.history = state.history;
      t.next_history = out.next.history;
      t.state.assign(s.data(), s.data() + s.size());
      t.next_state.assign(s_next.data(), s_next.data() + s_next.size());
      t.proposal.assign(a.proposal.data(), a.proposal.data() + a.proposal.size());
      t.items = a.items;
      t.reward = out.reward;
      t.terminal = out.terminal;
      if (!std::isfinite(t.reward.utility) || !std::isfinite(t.reward.fairness)) {
        throw nn::NumericError("non-finite reward in episode " + std::to_string(episode + 1));
      }
      buffer.push(std::move(t));
      rewards.push_back(out.reward);

      state = std::move(out.next);
      s = std::move(s_next);
      if (out.terminal) break;
    }

    EpisodeLog entry;
    entry.episode = episode + 1;
    entry.omega_u = omega0.utility();
    entry.scalarized_return = discounted_return(rewards, omega0, config.gamma);
    entry.critic_loss = std::numeric_limits<double>::quiet_NaN();
    entry.actor_objective = std::numeric_limits<double>::quiet_NaN();

    if (buffer.size() >= ready) {
      const int updates = config.updates_per_episode > 0 ? config.updates_per_episode
                                                         : static_cast<int>(rewards.size());
      double loss_sum = 0.0;
      double objective_sum = 0.0;
      for (int u = 0; u < updates; ++u) {
        try {
          auto [loss, objective] = update_agent(agent, buffer, omega0, embeddings, config, rng);
          loss_sum += loss;
          objective_sum += objective;
        } catch (const nn::NumericError& e) {
          throw nn::NumericError("training diverged in episode " + std::to_string(episode + 1) +
                                 ": " + e.what());
        }
      }
      entry.critic_loss = loss_sum / updates;
      entry.actor_objective = objective_sum / updates;
    }
    log.push_back(entry);
    if (on_episode) on_episode(entry);
  }
  return log;
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
  std::ostringstream os;
  os.precision(9);
  os << kTrainLogHeader << '\n';
  for (const auto& e : log) {
    os << e.episode << ',' << e.omega_u << ',' << e.scalarized_return << ',' << e.critic_loss << ','
       << e.actor_objective << '\n';
  }
  return os.str();
}

}  // namespace mofir
