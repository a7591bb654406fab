#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mofir/config.hpp"
#include "mofir/data.hpp"
#include "mofir/evaluate.hpp"
#include "mofir/frontier.hpp"
#include "mofir/log.hpp"

namespace fs = std::filesystem;
using namespace mofir;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string data;
  std::string out;
  std::string delimiter;
  int episodes = 0;
  int jobs = 1;
  int grid = 11;
  double omega = 1.0;
};

struct Loaded {
  InteractionLog log;
  SplitDataset split;
  ItemGrouping grouping;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

Loaded load_data(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw UsageError("no dataset given (use --data or data.path)");
  if (!fs::exists(cfg.data_path)) throw UsageError("dataset not found: " + cfg.data_path);
  Loaded l;
  l.log = load_interactions(cfg.data_path, {cfg.delimiter});
  l.split = chronological_split(l.log, cfg.split_ratio);
  l.grouping = group_items_by_popularity(l.split, cfg.popularity_scope, cfg.popular_share);
  return l;
}

fs::path require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw UsageError(std::string("missing ") + what + " " + path.string() +
                     " (run the earlier pipeline step first)");
  }
  return path;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

int cmd_ingest(const RunConfig& cfg) {
  const Loaded l = load_data(cfg);
  const DatasetStats stats = dataset_stats(l.log);
  const fs::path out = cfg.out;
  write_file(out / "split.json", split_manifest_json(l.split));
  write_file(out / "grouping.csv", grouping_csv(l.grouping));
  nlohmann::ordered_json j;
  j["users"] = stats.users;
  j["items"] = stats.items;
  j["actions"] = stats.actions;
  j["density"] = stats.density;
  j["split_users"] = l.split.kept_users().size();
  j["dropped_users"] = l.split.dropped_users;
  j["popular_items"] = l.grouping.popular_count;
  j["beta"] = l.grouping.beta;
  write_file(out / "stats.json", j.dump(2) + "\n");
  std::cout << "users=" << stats.users << " items=" << stats.items << " actions=" << stats.actions
            << " density=" << fixed(100.0 * stats.density, 3) << "%\n";
  return 0;
}

int cmd_pretrain(const RunConfig& cfg) {
  const Loaded l = load_data(cfg);
  MfReport report;
  const EmbeddingTable emb = pretrain_mf(l.split, cfg.mf_config(), &report);
  const fs::path out = cfg.out;
  save_embeddings(emb, out / "embeddings.bin");
  std::ostringstream csv;
  csv.precision(9);
  csv << "epoch,loss\n0," << report.initial_loss << '\n';
  for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
    csv << e + 1 << ',' << report.epoch_losses[e] << '\n';
  }
  write_file(out / "mf_loss.csv", csv.str());
  std::cout << "embeddings: " << emb.num_users() << " users, " << emb.num_items() << " items, dim "
            << emb.dim() << "; probe loss " << report.initial_loss << " -> "
            << (report.epoch_losses.empty() ? report.initial_loss : report.epoch_losses.back())
            << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const Loaded l = load_data(cfg);
  const fs::path out = cfg.out;
  const EmbeddingTable emb = load_embeddings(require_file(out / "embeddings.bin", "embeddings"));
  const RecEnvironment env(l.split, l.grouping, cfg.env);
  Agent agent(cfg.network(), cfg.init_seed());
  const TrainConfig tc = cfg.train_config();
  const int every = std::max(1, tc.episodes / 20);
  const auto log = train(agent, env, emb, tc, [&](const EpisodeLog& e) {
    if (e.episode % every == 0 || e.episode == tc.episodes) {
      spdlog::info("episode {}/{} return {:.4f} critic {:.5f} actor {:.4f}", e.episode, tc.episodes,
                   e.scalarized_return, e.critic_loss, e.actor_objective);
    } else {
      spdlog::debug("episode {} return {:.4f}", e.episode, e.scalarized_return);
    }
  });
  agent.save(out / "agent.ckpt");
  write_file(out / "train_log.csv", training_log_csv(log));
  std::cout << "checkpoint " << (out / "agent.ckpt").string() << " fingerprint "
            << fingerprint(encode_records(agent.to_records())) << '\n';
  return 0;
}

struct Trained {
  Loaded data;
  EmbeddingTable emb;
  Agent agent;
};

Trained load_trained(const RunConfig& cfg) {
  const fs::path out = cfg.out;
  Trained t{load_data(cfg), load_embeddings(require_file(out / "embeddings.bin", "embeddings")),
            Agent(cfg.network(), cfg.init_seed())};
  t.agent.load(require_file(out / "agent.ckpt", "checkpoint"));
  return t;
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.metrics = cfg.metrics;
  o.jobs = cfg.jobs;
  return o;
}

int cmd_eval(const RunConfig& cfg, double omega_u) {
  const Trained t = load_trained(cfg);
  const RecEnvironment env(t.data.split, t.data.grouping, cfg.env);
  const auto omega = PreferenceVector::from_utility(omega_u);
  const EvalReport report = evaluate(t.agent, omega, env, t.emb, eval_options(cfg));
  const fs::path out = cfg.out;
  const std::string stem = "eval_omega_" + fixed(omega_u, 2);
  write_file(out / (stem + ".json"), report_json(report) + "\n");
  write_file(out / (stem + ".csv"), std::string(kReportCsvHeader) + "\n" + report_csv_rows(report));
  std::cout << report_json(report) << '\n';
  return 0;
}

int cmd_frontier(const RunConfig& cfg) {
  const Trained t = load_trained(cfg);
  const RecEnvironment env(t.data.split, t.data.grouping, cfg.env);
  const auto grid = preference_grid(cfg.grid);
  const auto points = sweep(t.agent, env, t.emb, grid, eval_options(cfg));
  const auto kept = pareto_flags(std::span<const FrontierPoint>(points));
  const fs::path path = fs::path(cfg.out) / "frontier.csv";
  emit_frontier(points, kept, path);
  std::cout << frontier_csv(points, kept);
  return 0;
}

bool given(const CLI::App& sub, const std::string& name) {
  const CLI::Option* opt = sub.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig resolve(const Flags& f, const CLI::App& sub) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  if (given(sub, "--seed")) cfg.seed = f.seed;
  if (given(sub, "--data")) cfg.data_path = f.data;
  if (given(sub, "--out")) cfg.out = f.out;
  if (given(sub, "--delimiter")) {
    const std::string d = f.delimiter == "\\t" || f.delimiter == "tab" ? "\t" : f.delimiter;
    if (d.size() != 1) throw UsageError("--delimiter must be one character");
    cfg.delimiter = d[0];
  }
  if (given(sub, "--episodes")) cfg.train.episodes = f.episodes;
  if (given(sub, "--jobs")) cfg.jobs = f.jobs;
  if (given(sub, "--grid")) cfg.grid = f.grid;
  validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Multi-objective fairness-aware recommendation with preference-conditioned DDPG"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Master random seed");
    sub->add_option("--data", f.data, "Interaction file (user, item[, rating], timestamp)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--delimiter", f.delimiter, "Field delimiter (default tab)");
    sub->add_option("--jobs", f.jobs, "Evaluation threads")->check(CLI::Range(1, 256));
  };
  auto* ingest = app.add_subcommand("ingest", "Load, split and group a dataset");
  auto* pretrain = app.add_subcommand("pretrain", "Fit user/item embeddings by MF");
  auto* train_cmd = app.add_subcommand("train", "Train the preference-conditioned agent");
  auto* eval = app.add_subcommand("eval", "Evaluate the checkpoint at one preference");
  auto* frontier = app.add_subcommand("frontier", "Sweep preferences and extract the Pareto set");
  for (auto* sub : {ingest, pretrain, train_cmd, eval, frontier}) common(sub);
  train_cmd->add_option("--episodes", f.episodes, "Training episodes")->check(CLI::NonNegativeNumber);
  eval->add_option("--omega", f.omega, "Utility weight; fairness weight is 1 - omega")
      ->check(CLI::Range(0.0, 1.0));
  frontier->add_option("--grid", f.grid, "Number of evenly spaced utility weights")
      ->check(CLI::Range(1, 1001));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const RunConfig cfg = resolve(f, *sub);
    fs::create_directories(cfg.out);
    const std::string resolved = to_json(cfg).dump(2);
    write_file(fs::path(cfg.out) / "config.resolved.json", resolved + "\n");
    spdlog::info("{} with seed {}; resolved config:\n{}", sub->get_name(), cfg.seed, resolved);

    if (sub == ingest) return cmd_ingest(cfg);
    if (sub == pretrain) return cmd_pretrain(cfg);
    if (sub == train_cmd) return cmd_train(cfg);
    if (sub == eval) return cmd_eval(cfg, f.omega);
    return cmd_frontier(cfg);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const CheckpointError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const EnvError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
}
