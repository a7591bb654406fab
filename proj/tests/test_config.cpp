#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mofir/config.hpp"

using namespace mofir;
using nlohmann::json;

TEST_CASE("defaults validate and round-trip through JSON") {
  RunConfig c;
  CHECK_NOTHROW(validate(c));
  const auto j = to_json(c);
  CHECK(run_config_from_json(json::parse(j.dump())) == c);
  CHECK(j["env"]["slate_size"] == 10);
  CHECK(j["env"]["history_length"] == 5);
  CHECK(j["env"]["fairness"] == "floor");
  CHECK(j["network"]["mean_squash"] == "unit_rows");
  CHECK(j["popularity_scope"] == "train");
  CHECK(j["metrics"]["kl_log_base"] == 2.0);
}

TEST_CASE("every field survives a round trip") {
  RunConfig c;
  c.data_path = "some/where.csv";
  c.delimiter = ',';
  c.split_ratio = 0.7;
  c.popular_share = 0.25;
  c.popularity_scope = PopularityScope::kAllInteractions;
  c.env.slate_size = 7;
  c.env.fairness = FairnessReward::kHingePenalty;
  c.mf.dim = 8;
  c.mf.lr = 0.01;
  c.gru_layers = 1;
  c.actor_hidden = {32};
  c.critic_hidden = {32, 16, 8};
  c.mean_squash = MeanSquash::kTanh;
  c.train.gamma = 0.5;
  c.train.updates_per_episode = 4;
  c.train.exploration_start = 0.3;
  c.metrics.ks = {1, 20};
  c.metrics.kl_mode = KlMode::kPooled;
  c.grid = 5;
  c.jobs = 3;
  c.seed = 123456789012345ULL;
  c.out = "runs/x";
  const auto back = run_config_from_json(json::parse(to_json(c).dump()));
  CHECK(back == c);
  CHECK(back.seed == c.seed);
  CHECK(back.delimiter == ',');
  CHECK(back.critic_hidden == c.critic_hidden);
  CHECK(back.network().mean_squash == MeanSquash::kTanh);
  CHECK(back.network().embedding_dim == 8);
  CHECK_FALSE(back == RunConfig{});
}

TEST_CASE("partial documents keep defaults and overlay a base") {
  RunConfig base;
  base.seed = 9;
  const auto c = run_config_from_json(json::parse(R"({"train": {"episodes": 12}})"), base);
  CHECK(c.train.episodes == 12);
  CHECK(c.seed == 9);
  CHECK(c.train.gamma == base.train.gamma);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"train": {"epochs": 1}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"env": {"fairness": "fair"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"network": {"mean_squash": "x"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"train": {"gamma": "high"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"data": {"delimiter": ";;"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse("[1, 2]")), ConfigError);

  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.train.gamma = 1.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.train.tau = 0.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.split_ratio = 1.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.env.slate_size = 0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.actor_hidden.clear(); })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.metrics.ks.clear(); })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](RunConfig& c) { c.train.batch_size = 0; })), ConfigError);
}

TEST_CASE("config files load and report problems") {
  const auto dir = testing::temp_dir("config");
  {
    std::ofstream out(dir / "ok.json");
    out << R"({"seed": 4, "env": {"max_steps": 7}})";
  }
  const auto c = load_run_config(dir / "ok.json");
  CHECK(c.seed == 4);
  CHECK(c.env.max_steps == 7);
  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir / "absent.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("component seeds are derived from the master seed") {
  RunConfig a, b;
  a.seed = b.seed = 77;
  CHECK(a.mf_config().seed == b.mf_config().seed);
  CHECK(a.train_config().seed == b.train_config().seed);
  CHECK(a.init_seed() == b.init_seed());
  const std::set<std::uint64_t> streams{a.mf_config().seed, a.train_config().seed, a.init_seed()};
  CHECK(streams.size() == 3);
  b.seed = 78;
  CHECK(a.mf_config().seed != b.mf_config().seed);
  CHECK(a.train_config().seed != b.train_config().seed);
  CHECK(a.init_seed() != b.init_seed());
}
