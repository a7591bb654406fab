#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "mofir/data.hpp"

namespace mofir {

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Frozen user/item features. Row u of `users` is e_u, row i of `items` is v_i.
struct EmbeddingTable {
  MatrixF users;
  MatrixF items;

  int dim() const { return static_cast<int>(items.cols()); }
  std::size_t num_users() const { return static_cast<std::size_t>(users.rows()); }
  std::size_t num_items() const { return static_cast<std::size_t>(items.rows()); }

  bool operator==(const EmbeddingTable& other) const;
};

struct MfConfig {
  int dim = 16;
  int epochs = 30;
  double lr = 0.05;
  double reg = 1e-3;
  int negatives_per_positive = 4;
  double init_scale = 0.05;
  std::uint64_t seed = 42;
};

/// One (user, item, label) term of the pointwise objective.
struct MfSample {
  UserId user;
  ItemId item;
  double label;
};

/// Mean over samples of (e_u . v_i - y)^2 plus reg * (|U|^2 + |V|^2).
double mf_objective(std::span<const MfSample> samples, const MatrixD& users,
                    const MatrixD& items, double reg);

/// Analytic gradient of `mf_objective`, written into grad_users / grad_items.
void mf_gradient(std::span<const MfSample> samples, const MatrixD& users,
                 const MatrixD& items, double reg, MatrixD& grad_users, MatrixD& grad_items);

struct MfReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // squared error on a fixed probe set after each epoch
};

/// SGD on binary labels: every training positive is paired with
/// `negatives_per_positive` uniformly drawn items labelled 0.
EmbeddingTable pretrain_mf(const SplitDataset& split, const MfConfig& config,
                           MfReport* report = nullptr);

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace mofir
