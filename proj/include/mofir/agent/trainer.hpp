#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mofir/agent/networks.hpp"
#include "mofir/agent/replay.hpp"
#include "mofir/agent/updates.hpp"
#include "mofir/checkpoint.hpp"
#include "mofir/embed.hpp"
#include "mofir/env.hpp"

namespace mofir {

/// Online and target actor/critic pairs plus their optimiser state.
class Agent {
 public:
  Agent(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }

  std::vector<Record> to_records() const;
  /// Throws CheckpointError(kSchema) if the records describe another architecture.
  void from_records(std::span<const Record> records);

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

  Actor<float> actor;
  Critic<float> critic;
  Actor<float> target_actor;
  Critic<float> target_critic;

 private:
  NetworkSpec spec_;
};

struct TrainConfig {
  int episodes = 1000;              // M
  double gamma = 0.9;
  double tau = 0.001;
  int preference_samples = 4;       // N_w, fresh draws added to w_0 at each update
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::size_t warmup_transitions = 1000;
  /// Updates run after each rollout; 0 means one per environment step taken.
  int updates_per_episode = 0;
  /// Multiplier on the actor's sigma, decayed linearly from start to end.
  double exploration_start = 1.0;
  double exploration_end = 1.0;
  std::uint64_t seed = 1;
};

struct EpisodeLog {
  int episode = 0;
  double omega_u = 0.0;
  double scalarized_return = 0.0;  // discounted, under the episode's w_0
  double critic_loss = 0.0;        // mean over this episode's updates, NaN if none
  double actor_objective = 0.0;
};

using EpisodeCallback = std::function<void(const EpisodeLog&)>;

/// Multi-objective DDPG. Each episode draws a user and w_0, rolls out up to T
/// steps with exploration, then runs critic/actor updates over preference
/// sets {w_0} + N_w fresh draws, followed by soft target updates.
std::vector<EpisodeLog> train(Agent& agent, const RecEnvironment& env,
                              const EmbeddingTable& embeddings, const TrainConfig& config,
                              const EpisodeCallback& on_episode = {});

/// One critic step, actor step and both soft target updates on a sampled
/// minibatch. Returns {critic loss, actor objective}.
std::pair<double, double> update_agent(Agent& agent, const ReplayBuffer& buffer,
                                       const PreferenceVector& omega0,
                                       const EmbeddingTable& embeddings, const TrainConfig& config,
                                       Rng& rng);

inline constexpr std::string_view kTrainLogHeader =
    "episode,omega_u,scalarized_return,critic_loss,actor_objective";
std::string training_log_csv(const std::vector<EpisodeLog>& log);

}  // namespace mofir
