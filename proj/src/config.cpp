#include "mofir/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace mofir {
namespace {

using nlohmann::json;

constexpr std::uint64_t kMfStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kInitStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kTrainStream = 0x94d049bb133111ebULL;

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

const char* fairness_name(FairnessReward f) {
  switch (f) {
    case FairnessReward::kFloor: return "floor";
    case FairnessReward::kCapped: return "capped";
    case FairnessReward::kHingePenalty: return "hinge_penalty";
  }
  return "floor";
}

FairnessReward parse_fairness(const std::string& s) {
  if (s == "floor") return FairnessReward::kFloor;
  if (s == "capped") return FairnessReward::kCapped;
  if (s == "hinge_penalty") return FairnessReward::kHingePenalty;
  throw ConfigError("env.fairness must be floor, capped or hinge_penalty, got '" + s + "'");
}

const char* squash_name(MeanSquash m) {
  switch (m) {
    case MeanSquash::kNone: return "none";
    case MeanSquash::kTanh: return "tanh";
    case MeanSquash::kUnitRows: return "unit_rows";
  }
  return "unit_rows";
}

MeanSquash parse_squash(const std::string& s) {
  if (s == "none") return MeanSquash::kNone;
  if (s == "tanh") return MeanSquash::kTanh;
  if (s == "unit_rows") return MeanSquash::kUnitRows;
  throw ConfigError("network.mean_squash must be none, tanh or unit_rows, got '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config value out of range: " + what);
}

}  // namespace

NetworkSpec RunConfig::network() const {
  NetworkSpec n;
  n.embedding_dim = mf.dim;
  n.slate_size = env.slate_size;
  n.history_length = env.history_length;
  n.gru_hidden = gru_hidden;
  n.gru_layers = gru_layers;
  n.actor_hidden = actor_hidden;
  n.critic_hidden = critic_hidden;
  n.mean_squash = mean_squash;
  return n;
}

MfConfig RunConfig::mf_config() const {
  MfConfig c = mf;
  c.seed = mix(seed, kMfStream);
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c = train;
  c.seed = mix(seed, kTrainStream);
  return c;
}

std::uint64_t RunConfig::init_seed() const { return mix(seed, kInitStream); }

bool RunConfig::operator==(const RunConfig& o) const { return to_json(*this) == to_json(o); }

void validate(const RunConfig& c) {
  require(c.split_ratio > 0.0 && c.split_ratio < 1.0, "split_ratio in (0, 1)");
  require(c.popular_share > 0.0 && c.popular_share < 1.0, "popular_share in (0, 1)");
  require(c.env.slate_size >= 1 && c.env.slate_size <= 100, "env.slate_size in [1, 100]");
  require(c.env.history_length >= 1 && c.env.history_length <= 100, "env.history_length in [1, 100]");
  require(c.env.max_steps >= 1 && c.env.max_steps <= 10000, "env.max_steps in [1, 10000]");
  require(c.mf.dim >= 1 && c.mf.dim <= 1024, "mf.dim in [1, 1024]");
  require(c.mf.epochs >= 0, "mf.epochs >= 0");
  require(c.mf.lr > 0.0, "mf.lr > 0");
  require(c.mf.reg >= 0.0, "mf.reg >= 0");
  require(c.mf.negatives_per_positive >= 0, "mf.negatives_per_positive >= 0");
  require(c.mf.init_scale > 0.0, "mf.init_scale > 0");
  require(c.gru_hidden >= 1, "network.gru_hidden >= 1");
  require(c.gru_layers >= 1, "network.gru_layers >= 1");
  require(!c.actor_hidden.empty(), "network.actor_hidden needs at least one layer");
  require(!c.critic_hidden.empty(), "network.critic_hidden needs at least one layer");
  for (int w : c.actor_hidden) require(w >= 1, "network.actor_hidden widths >= 1");
  for (int w : c.critic_hidden) require(w >= 1, "network.critic_hidden widths >= 1");
  const auto& t = c.train;
  require(t.episodes >= 0, "train.episodes >= 0");
  require(t.gamma >= 0.0 && t.gamma < 1.0, "train.gamma in [0, 1)");
  require(t.tau > 0.0 && t.tau <= 1.0, "train.tau in (0, 1]");
  require(t.preference_samples >= 0, "train.preference_samples >= 0");
  require(t.batch_size >= 1, "train.batch_size >= 1");
  require(t.buffer_capacity >= static_cast<std::size_t>(t.batch_size),
          "train.buffer_capacity >= train.batch_size");
  require(t.actor_lr > 0.0, "train.actor_lr > 0");
  require(t.critic_lr > 0.0, "train.critic_lr > 0");
  require(t.updates_per_episode >= 0, "train.updates_per_episode >= 0");
  require(t.exploration_start >= 0.0 && t.exploration_end >= 0.0, "train.exploration_* >= 0");
  require(!c.metrics.ks.empty(), "metrics.ks non-empty");
  for (int k : c.metrics.ks) require(k >= 1, "metrics.ks entries >= 1");
  require(c.metrics.kl_log_base > 1.0, "metrics.kl_log_base > 1");
  require(c.grid >= 1, "grid >= 1");
  require(c.jobs >= 1 && c.jobs <= 256, "jobs in [1, 256]");
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  reject_unknown(j, "", {"data", "split_ratio", "popular_share", "popularity_scope", "env", "mf", "network", "train",
                         "metrics", "grid", "jobs", "seed", "out"});
  if (j.contains("data")) {
    const auto& d = j.at("data");
    reject_unknown(d, "data", {"path", "delimiter"});
    read(d, "path", c.data_path, "data.");
    if (d.contains("delimiter")) {
      std::string delim;
      read(d, "delimiter", delim, "data.");
      if (delim.size() != 1) throw ConfigError("data.delimiter must be a single character");
      c.delimiter = delim[0];
    }
  }
  read(j, "split_ratio", c.split_ratio, "");
  read(j, "popular_share", c.popular_share, "");
  if (j.contains("popularity_scope")) {
    std::string scope;
    read(j, "popularity_scope", scope, "");
    if (scope == "train") {
      c.popularity_scope = PopularityScope::kTrainOnly;
    } else if (scope == "all") {
      c.popularity_scope = PopularityScope::kAllInteractions;
    } else {
      throw ConfigError("popularity_scope must be train or all, got '" + scope + "'");
    }
  }
  if (j.contains("env")) {
    const auto& e = j.at("env");
    reject_unknown(e, "env", {"slate_size", "history_length", "max_steps", "fairness"});
    read(e, "slate_size", c.env.slate_size, "env.");
    read(e, "history_length", c.env.history_length, "env.");
    read(e, "max_steps", c.env.max_steps, "env.");
    if (e.contains("fairness")) {
      std::string f;
      read(e, "fairness", f, "env.");
      c.env.fairness = parse_fairness(f);
    }
  }
  if (j.contains("mf")) {
    const auto& m = j.at("mf");
    reject_unknown(m, "mf", {"dim", "epochs", "lr", "reg", "negatives_per_positive", "init_scale"});
    read(m, "dim", c.mf.dim, "mf.");
    read(m, "epochs", c.mf.epochs, "mf.");
    read(m, "lr", c.mf.lr, "mf.");
    read(m, "reg", c.mf.reg, "mf.");
    read(m, "negatives_per_positive", c.mf.negatives_per_positive, "mf.");
    read(m, "init_scale", c.mf.init_scale, "mf.");
  }
  if (j.contains("network")) {
    const auto& n = j.at("network");
    reject_unknown(n, "network", {"gru_hidden", "gru_layers", "actor_hidden", "critic_hidden",
                                        "mean_squash"});
    read(n, "gru_hidden", c.gru_hidden, "network.");
    read(n, "gru_layers", c.gru_layers, "network.");
    read(n, "actor_hidden", c.actor_hidden, "network.");
    read(n, "critic_hidden", c.critic_hidden, "network.");
    if (n.contains("mean_squash")) {
      std::string sq;
      read(n, "mean_squash", sq, "network.");
      c.mean_squash = parse_squash(sq);
    }
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t, "train",
                   {"episodes", "gamma", "tau", "preference_samples", "batch_size",
                    "buffer_capacity", "actor_lr", "critic_lr", "warmup_transitions",
                    "updates_per_episode", "exploration_start", "exploration_end"});
    read(t, "episodes", c.train.episodes, "train.");
    read(t, "gamma", c.train.gamma, "train.");
    read(t, "tau", c.train.tau, "train.");
    read(t, "preference_samples", c.train.preference_samples, "train.");
    read(t, "batch_size", c.train.batch_size, "train.");
    read(t, "buffer_capacity", c.train.buffer_capacity, "train.");
    read(t, "actor_lr", c.train.actor_lr, "train.");
    read(t, "critic_lr", c.train.critic_lr, "train.");
    read(t, "warmup_transitions", c.train.warmup_transitions, "train.");
    read(t, "updates_per_episode", c.train.updates_per_episode, "train.");
    read(t, "exploration_start", c.train.exploration_start, "train.");
    read(t, "exploration_end", c.train.exploration_end, "train.");
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    reject_unknown(m, "metrics", {"ks", "kl_log_base", "kl_mode"});
    read(m, "ks", c.metrics.ks, "metrics.");
    read(m, "kl_log_base", c.metrics.kl_log_base, "metrics.");
    if (m.contains("kl_mode")) {
      std::string mode;
      read(m, "kl_mode", mode, "metrics.");
      if (mode == "per_user") {
        c.metrics.kl_mode = KlMode::kPerUser;
      } else if (mode == "pooled") {
        c.metrics.kl_mode = KlMode::kPooled;
      } else {
        throw ConfigError("metrics.kl_mode must be per_user or pooled, got '" + mode + "'");
      }
    }
  }
  read(j, "grid", c.grid, "");
  read(j, "jobs", c.jobs, "");
  read(j, "seed", c.seed, "");
  read(j, "out", c.out, "");
  validate(c);
  return c;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["data"] = {{"path", c.data_path}, {"delimiter", std::string(1, c.delimiter)}};
  j["split_ratio"] = c.split_ratio;
  j["popular_share"] = c.popular_share;
  j["popularity_scope"] = c.popularity_scope == PopularityScope::kTrainOnly ? "train" : "all";
  j["env"] = {{"slate_size", c.env.slate_size},
              {"history_length", c.env.history_length},
              {"max_steps", c.env.max_steps},
              {"fairness", fairness_name(c.env.fairness)}};
  j["mf"] = {{"dim", c.mf.dim},
             {"epochs", c.mf.epochs},
             {"lr", c.mf.lr},
             {"reg", c.mf.reg},
             {"negatives_per_positive", c.mf.negatives_per_positive},
             {"init_scale", c.mf.init_scale}};
  j["network"] = {{"gru_hidden", c.gru_hidden},
                  {"gru_layers", c.gru_layers},
                  {"actor_hidden", c.actor_hidden},
                  {"critic_hidden", c.critic_hidden},
                  {"mean_squash", squash_name(c.mean_squash)}};
  const auto& t = c.train;
  j["train"] = {{"episodes", t.episodes},
                {"gamma", t.gamma},
                {"tau", t.tau},
                {"preference_samples", t.preference_samples},
                {"batch_size", t.batch_size},
                {"buffer_capacity", t.buffer_capacity},
                {"actor_lr", t.actor_lr},
                {"critic_lr", t.critic_lr},
                {"warmup_transitions", t.warmup_transitions},
                {"updates_per_episode", t.updates_per_episode},
                {"exploration_start", t.exploration_start},
                {"exploration_end", t.exploration_end}};
  j["metrics"] = {{"ks", c.metrics.ks},
                  {"kl_log_base", c.metrics.kl_log_base},
                  {"kl_mode", c.metrics.kl_mode == KlMode::kPerUser ? "per_user" : "pooled"}};
  j["grid"] = c.grid;
  j["jobs"] = c.jobs;
  j["seed"] = c.seed;
  j["out"] = c.out;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace mofir
