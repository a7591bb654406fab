#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mofir/config.hpp"
#include "mofir/frontier.hpp"
#include "mofir/synthetic.hpp"

using namespace mofir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Run cli(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "stdout.txt";
  const auto err = scratch / "stderr.txt";
  const std::string cmd = std::string("MOFIR_LOG=error '") + MOFIR_CLI_PATH + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Small planted run that trains in seconds.
fs::path write_small_config(const fs::path& dir) {
  const auto data = dir / "planted.tsv";
  PlantedConfig pc;
  pc.users = 40;
  pc.items = 50;
  std::ofstream(data) << to_tsv(make_planted_log(pc));
  RunConfig c;
  c.data_path = data.string();
  c.mf.dim = 8;
  c.mf.epochs = 3;
  c.gru_hidden = 8;
  c.actor_hidden = {16};
  c.critic_hidden = {16};
  c.train.episodes = 6;
  c.train.batch_size = 8;
  c.train.warmup_transitions = 8;
  c.train.updates_per_episode = 2;
  c.seed = 3;
  const auto path = dir / "config.json";
  std::ofstream(path) << to_json(c).dump(2);
  return path;
}

}  // namespace

TEST_CASE("ingest reports MovieLens-100K statistics and is repeatable") {
  const auto dir = testing::temp_dir("cli_ingest");
  const std::string data = testing::movielens_path().string();
  const auto r = cli("ingest --data '" + data + "' --out '" + (dir / "a").string() + "'", dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("users=943 items=1682 actions=100000") != std::string::npos);
  for (const char* f : {"split.json", "grouping.csv", "stats.json", "config.resolved.json"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  REQUIRE(cli("ingest --data '" + data + "' --out '" + (dir / "b").string() + "'", dir).code == 0);
  for (const char* f : {"split.json", "grouping.csv", "stats.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }

  const auto missing = cli("ingest --data /no/such/u.data --out '" + (dir / "c").string() + "'", dir);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/no/such/u.data") != std::string::npos);
  CHECK(cli("", dir).code == 2);
  CHECK(cli("bogus", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with code 2") {
  const auto dir = testing::temp_dir("cli_usage");
  CHECK(cli("eval --omega 1.5 --out '" + dir.string() + "'", dir).code == 2);
  CHECK(cli("eval --omega -0.1 --out '" + dir.string() + "'", dir).code == 2);
  CHECK(cli("frontier --grid 0 --out '" + dir.string() + "'", dir).code == 2);
  CHECK(cli("train --config /no/such.json", dir).code == 2);
  std::ofstream(dir / "bad.json") << R"({"train": {"gamma": 2.0}})";
  CHECK(cli("train --config '" + (dir / "bad.json").string() + "'", dir).code == 2);
  std::ofstream(dir / "unknown.json") << R"({"nonsense": 1})";
  CHECK(cli("train --config '" + (dir / "unknown.json").string() + "'", dir).code == 2);
  // eval without a checkpoint is a missing prerequisite.
  CHECK(cli("eval --omega 0.5 --out '" + (dir / "empty").string() + "'", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("full pipeline on planted data is reproducible") {
  const auto dir = testing::temp_dir("cli_pipeline");
  const auto config = write_small_config(dir);
  auto pipeline = [&](const fs::path& out) {
    const std::string common = " --config '" + config.string() + "' --out '" + out.string() + "'";
    REQUIRE(cli("ingest" + common, dir).code == 0);
    REQUIRE(cli("pretrain" + common, dir).code == 0);
    const auto t = cli("train" + common, dir);
    REQUIRE_MESSAGE(t.code == 0, t.err);
    CHECK(t.out.find("fingerprint") != std::string::npos);
    const auto e = cli("eval --omega 0.5" + common, dir);
    REQUIRE_MESSAGE(e.code == 0, e.err);
    const auto f = cli("frontier --grid 2" + common, dir);
    REQUIRE_MESSAGE(f.code == 0, f.err);
    return f.out;
  };
  const auto a = dir / "a";
  const auto b = dir / "b";
  const std::string fa = pipeline(a);
  const std::string fb = pipeline(b);
  CHECK(fa == fb);

  for (const char* f : {"split.json", "grouping.csv", "embeddings.bin", "agent.ckpt", "train_log.csv",
                        "eval_omega_0.50.json", "eval_omega_0.50.csv", "frontier.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }

  const auto rows = parse_frontier_csv(slurp(a / "frontier.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].point.omega.utility() == 0.0);
  CHECK(rows[1].point.omega.utility() == 1.0);

  const auto eval_json = nlohmann::json::parse(slurp(a / "eval_omega_0.50.json"));
  CHECK(eval_json["omega_u"] == 0.5);
  CHECK(eval_json["omega_f"] == 0.5);

  // The echoed configuration parses back to the configuration that was used.
  const auto echoed = load_run_config(a / "config.resolved.json");
  auto expected = load_run_config(config);
  expected.out = a.string();
  expected.grid = 2;  // the last command run there was frontier --grid 2
  CHECK(echoed == expected);

  // Flags override the file.
  const auto c = dir / "c";
  REQUIRE(cli("ingest --config '" + config.string() + "' --seed 11 --out '" + c.string() + "'", dir).code == 0);
  CHECK(load_run_config(c / "config.resolved.json").seed == 11);
  fs::remove_all(dir);
}
