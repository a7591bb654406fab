#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mofir/agent/trainer.hpp"
#include "mofir/embed.hpp"
#include "mofir/env.hpp"
#include "mofir/metrics.hpp"

namespace mofir {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a run needs. `seed` is the master seed; the embedding, network
/// initialisation and training streams are derived from it.
struct RunConfig {
  std::string data_path;
  char delimiter = '\t';
  double split_ratio = 0.8;
  double popular_share = 0.2;
  PopularityScope popularity_scope = PopularityScope::kTrainOnly;

  EnvConfig env;
  MfConfig mf;
  int gru_hidden = 16;
  int gru_layers = 2;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  MeanSquash mean_squash = MeanSquash::kUnitRows;
  TrainConfig train;
  MetricOptions metrics;

  int grid = 11;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out = "runs/default";

  NetworkSpec network() const;
  /// Copies of the component configs with their seeds derived from `seed`.
  MfConfig mf_config() const;
  TrainConfig train_config() const;
  std::uint64_t init_seed() const;

  bool operator==(const RunConfig&) const;
};

/// Throws ConfigError naming the first field outside its range.
void validate(const RunConfig& config);

/// Unknown keys are rejected; missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mofir
