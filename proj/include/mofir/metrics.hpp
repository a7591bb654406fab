#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mofir/agent/preference.hpp"
#include "mofir/data.hpp"
#include "mofir/env.hpp"

namespace mofir {

// Ranking metrics return nullopt when `relevant` is empty; such users are
// left out of averages. `relevant` is treated as a set.

std::optional<double> recall_at_k(std::span<const ItemId> recommended,
                                  std::span<const ItemId> relevant, int k);
std::optional<double> precision_at_k(std::span<const ItemId> recommended,
                                     std::span<const ItemId> relevant, int k);
std::optional<double> f1_at_k(std::span<const ItemId> recommended,
                              std::span<const ItemId> relevant, int k);
/// Binary-relevance NDCG with 1/log2(rank + 1) gains.
std::optional<double> ndcg_at_k(std::span<const ItemId> recommended,
                                std::span<const ItemId> relevant, int k);

/// 100 * sum_j p(j) log(p(j) / q(j)) with 0 log 0 = 0. Base 2 by default.
double kl_divergence_percent(std::array<double, 2> p, std::array<double, 2> q,
                             double log_base = 2.0);

/// Group shares (popular, long tail) of the first k items.
std::array<double, 2> group_distribution_at_k(std::span<const ItemId> recommended,
                                              const ItemGrouping& grouping, int k);
/// Catalogue group shares (|G0| / |I|, |G1| / |I|).
std::array<double, 2> catalogue_distribution(const ItemGrouping& grouping);

double kl_divergence_at_k(std::span<const ItemId> recommended, const ItemGrouping& grouping,
                          int k, double log_base = 2.0);
/// 100 * |top-k in G0| / k.
double popularity_rate_at_k(std::span<const ItemId> recommended, const ItemGrouping& grouping,
                            int k);

/// sum_t gamma^t (w . r_t), with gamma in [0, 1).
double discounted_return(std::span<const RewardVector> rewards, const PreferenceVector& omega,
                         double gamma);

struct MetricRow {
  int k = 0;
  double recall = 0.0;           // fractions in [0, 1]
  double f1 = 0.0;
  double ndcg = 0.0;
  double kl = 0.0;               // percent
  double popularity_rate = 0.0;  // percent
};

struct EvalReport {
  PreferenceVector omega;
  std::vector<MetricRow> rows;  // ascending k
  std::size_t users_ranked = 0;  // users with a non-empty relevant set
  std::size_t users_total = 0;

  const MetricRow& at(int k) const;
  bool operator==(const EvalReport&) const;
};

enum class KlMode { kPerUser, kPooled };

struct MetricOptions {
  std::vector<int> ks{5, 10, 20};
  double kl_log_base = 2.0;
  KlMode kl_mode = KlMode::kPerUser;
};

/// Averages metrics over users. lists[u] is the ranked list for user u and
/// relevant[u] its ground truth; lists must be at least max(ks) long.
EvalReport aggregate_metrics(const std::vector<std::vector<ItemId>>& lists,
                             const std::vector<std::vector<ItemId>>& relevant,
                             const ItemGrouping& grouping, const MetricOptions& options,
                             const PreferenceVector& omega);

std::string report_json(const EvalReport& report);
inline constexpr std::string_view kReportCsvHeader = "omega_u,K,recall,f1,ndcg,kl,pop_rate";
/// One CSV line per k, without the header.
std::string report_csv_rows(const EvalReport& report);

}  // namespace mofir
