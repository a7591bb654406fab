#include "mofir/embed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mofir/checkpoint.hpp"

namespace mofir {
namespace {

std::vector<MfSample> positives(const SplitDataset& split) {
  std::vector<MfSample> out;
  for (UserId u : split.kept_users()) {
    for (ItemId i : split.users[static_cast<std::size_t>(u)].train) out.push_back({u, i, 1.0});
  }
  return out;
}

double squared_error(std::span<const MfSample> samples, const MatrixD& users,
                     const MatrixD& items) {
  double total = 0.0;
  for (const auto& s : samples) {
    double e = users.row(s.user).dot(items.row(s.item)) - s.label;
    total += e * e;
  }
  return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

}  // namespace

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  return users.rows() == other.users.rows() && users.cols() == other.users.cols() &&
         items.rows() == other.items.rows() && items.cols() == other.items.cols() &&
         std::equal(users.data(), users.data() + users.size(), other.users.data()) &&
         std::equal(items.data(), items.data() + items.size(), other.items.data());
}

double mf_objective(std::span<const MfSample> samples, const MatrixD& users,
                    const MatrixD& items, double reg) {
  return squared_error(samples, users, items) +
         reg * (users.squaredNorm() + items.squaredNorm());
}

void mf_gradient(std::span<const MfSample> samples, const MatrixD& users,
                 const MatrixD& items, double reg, MatrixD& grad_users, MatrixD& grad_items) {
  grad_users = 2.0 * reg * users;
  grad_items = 2.0 * reg * items;
  const double scale = samples.empty() ? 0.0 : 2.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    double e = users.row(s.user).dot(items.row(s.item)) - s.label;
    grad_users.row(s.user) += scale * e * items.row(s.item);
    grad_items.row(s.item) += scale * e * users.row(s.user);
  }
}

EmbeddingTable pretrain_mf(const SplitDataset& split, const MfConfig& config, MfReport* report) {
  if (config.dim <= 0) throw DataError("pretrain_mf: embedding dimension must be positive");
  auto pos = positives(split);
  if (pos.empty()) throw DataError("pretrain_mf: no training interactions");
  const auto n_users = static_cast<Eigen::Index>(split.num_users);
  const auto n_items = static_cast<Eigen::Index>(split.num_items);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-config.init_scale, config.init_scale);
  MatrixD users(n_users, config.dim);
  MatrixD items(n_items, config.dim);
  for (Eigen::Index k = 0; k < users.size(); ++k) users.data()[k] = init(rng);
  for (Eigen::Index k = 0; k < items.size(); ++k) items.data()[k] = init(rng);

  std::uniform_int_distribution<ItemId> any_item(0, static_cast<ItemId>(n_items - 1));

  // Fixed probe set so epoch losses are comparable.
  std::vector<MfSample> probe = pos;
  {
    std::mt19937_64 probe_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    for (const auto& p : pos) {
      for (int k = 0; k < config.negatives_per_positive; ++k) {
        probe.push_back({p.user, any_item(probe_rng), 0.0});
      }
    }
  }
  if (report) {
    report->initial_loss = squared_error(probe, users, items);
    report->epoch_losses.clear();
  }

  Eigen::RowVectorXd u_old(config.dim);
  auto sgd = [&](UserId u, ItemId i, double label) {
    auto ur = users.row(u);
    auto vr = items.row(i);
    const double e = ur.dot(vr) - label;
    u_old = ur;
    ur -= config.lr * (2.0 * e * vr + 2.0 * config.reg * ur);
    vr -= config.lr * (2.0 * e * u_old + 2.0 * config.reg * vr);
  };

  std::vector<std::size_t> order(pos.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto& p = pos[idx];
      sgd(p.user, p.item, 1.0);
      for (int k = 0; k < config.negatives_per_positive; ++k) sgd(p.user, any_item(rng), 0.0);
    }
    if (!users.allFinite() || !items.allFinite()) {
      throw DataError("pretrain_mf: embeddings diverged at epoch " + std::to_string(epoch + 1) +
                      "; lower the learning rate");
    }
    if (report) report->epoch_losses.push_back(squared_error(probe, users, items));
  }

  EmbeddingTable table;
  table.users = users.cast<float>();
  table.items = items.cast<float>();
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::vector<Record> records(3);
  records[0].name = "embed/dim";
  records[0].values = {static_cast<float>(table.dim())};
  records[1].name = "embed/users";
  records[1].values.assign(table.users.data(), table.users.data() + table.users.size());
  records[2].name = "embed/items";
  records[2].values.assign(table.items.data(), table.items.data() + table.items.size());
  write_records(path, records);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto records = read_records(path);
  const auto& dim_rec = find_record(records, "embed/dim", 1);
  const float dim_f = dim_rec.values[0];
  if (!(dim_f >= 1.0f) || dim_f != std::floor(dim_f)) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt, "embedding dimension record is invalid");
  }
  const auto dim = static_cast<Eigen::Index>(dim_f);
  auto load = [&](std::string_view name) {
    const auto& r = find_record(records, name);
    if (r.values.size() % static_cast<std::size_t>(dim) != 0) {
      throw CheckpointError(CheckpointError::Kind::kCorrupt,
                            "record '" + std::string(name) + "' length " +
                                std::to_string(r.values.size()) + " is not a multiple of " +
                                std::to_string(dim));
    }
    const auto rows = static_cast<Eigen::Index>(r.values.size()) / dim;
    return MatrixF(Eigen::Map<const MatrixF>(r.values.data(), rows, dim));
  };
  EmbeddingTable table;
  table.users = load("embed/users");
  table.items = load("embed/items");
  return table;
}

}  // namespace mofir
