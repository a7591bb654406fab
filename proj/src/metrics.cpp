#include "mofir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mofir {
namespace {

void check_k(std::span<const ItemId> recommended, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > recommended.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " needs 1 <= k <= list length " +
                                std::to_string(recommended.size()));
  }
}

std::vector<ItemId> as_set(std::span<const ItemId> items) {
  std::vector<ItemId> s(items.begin(), items.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

bool contains(const std::vector<ItemId>& set, ItemId item) {
  return std::binary_search(set.begin(), set.end(), item);
}

std::size_t hits(std::span<const ItemId> recommended, const std::vector<ItemId>& relevant, int k) {
  std::size_t n = 0;
  for (int r = 0; r < k; ++r) n += contains(relevant, recommended[static_cast<std::size_t>(r)]);
  return n;
}

}  // namespace

std::optional<double> recall_at_k(std::span<const ItemId> recommended,
                                  std::span<const ItemId> relevant, int k) {
  check_k(recommended, k);
  auto rel = as_set(relevant);
  if (rel.empty()) return std::nullopt;
  return static_cast<double>(hits(recommended, rel, k)) / static_cast<double>(rel.size());
}

std::optional<double> precision_at_k(std::span<const ItemId> recommended,
                                     std::span<const ItemId> relevant, int k) {
  check_k(recommended, k);
  auto rel = as_set(relevant);
  if (rel.empty()) return std::nullopt;
  return static_cast<double>(hits(recommended, rel, k)) / static_cast<double>(k);
}

std::optional<double> f1_at_k(std::span<const ItemId> recommended,
                              std::span<const ItemId> relevant, int k) {
  auto p = precision_at_k(recommended, relevant, k);
  if (!p) return std::nullopt;
  const double r = *recall_at_k(recommended, relevant, k);
  if (*p + r == 0.0) return 0.0;
  return 2.0 * *p * r / (*p + r);
}

std::optional<double> ndcg_at_k(std::span<const ItemId> recommended,
                                std::span<const ItemId> relevant, int k) {
  check_k(recommended, k);
  auto rel = as_set(relevant);
  if (rel.empty()) return std::nullopt;
  double dcg = 0.0;
  for (int r = 0; r < k; ++r) {
    if (contains(rel, recommended[static_cast<std::size_t>(r)])) dcg += 1.0 / std::log2(r + 2.0);
  }
  double ideal = 0.0;
  const int ideal_hits = std::min<int>(k, static_cast<int>(rel.size()));
  for (int r = 0; r < ideal_hits; ++r) ideal += 1.0 / std::log2(r + 2.0);
  return dcg / ideal;
}

double kl_divergence_percent(std::array<double, 2> p, std::array<double, 2> q, double log_base) {
  if (!(q[0] > 0.0 && q[1] > 0.0)) {
    throw std::invalid_argument("KL divergence: reference distribution has an empty group");
  }
  if (!(log_base > 0.0 && log_base != 1.0)) throw std::invalid_argument("KL divergence: bad log base");
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    if (p[j] > 0.0) total += p[j] * std::log(p[j] / q[j]);
  }
  return 100.0 * total / std::log(log_base);
}

std::array<double, 2> group_distribution_at_k(std::span<const ItemId> recommended,
                                              const ItemGrouping& grouping, int k) {
  check_k(recommended, k);
  int popular = 0;
  for (int r = 0; r < k; ++r) popular += grouping.is_popular(recommended[static_cast<std::size_t>(r)]);
  const double share = static_cast<double>(popular) / k;
  return {share, static_cast<double>(k - popular) / k};
}

std::array<double, 2> catalogue_distribution(const ItemGrouping& grouping) {
  const auto n = static_cast<double>(grouping.num_items());
  return {static_cast<double>(grouping.popular_count) / n,
          static_cast<double>(grouping.long_tail_count()) / n};
}

double kl_divergence_at_k(std::span<const ItemId> recommended, const ItemGrouping& grouping,
                          int k, double log_base) {
  return kl_divergence_percent(group_distribution_at_k(recommended, grouping, k),
                               catalogue_distribution(grouping), log_base);
}

double popularity_rate_at_k(std::span<const ItemId> recommended, const ItemGrouping& grouping,
                            int k) {
  check_k(recommended, k);
  int popular = 0;
  for (int r = 0; r < k; ++r) popular += grouping.is_popular(recommended[static_cast<std::size_t>(r)]);
  return 100.0 * popular / k;
}

double discounted_return(std::span<const RewardVector> rewards, const PreferenceVector& omega,
                         double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  double total = 0.0;
  double weight = 1.0;
  for (const auto& r : rewards) {
    total += weight * omega.scalarize(r);
    weight *= gamma;
  }
  return total;
}

const MetricRow& EvalReport::at(int k) const {
  for (const auto& row : rows) {
    if (row.k == k) return row;
  }
  throw std::out_of_range("report has no row for K=" + std::to_string(k));
}

bool EvalReport::operator==(const EvalReport& o) const {
  if (!(omega == o.omega) || users_ranked != o.users_ranked || users_total != o.users_total ||
      rows.size() != o.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = o.rows[i];
    if (a.k != b.k || a.recall != b.recall || a.f1 != b.f1 || a.ndcg != b.ndcg || a.kl != b.kl ||
        a.popularity_rate != b.popularity_rate) {
      return false;
    }
  }
  return true;
}

EvalReport aggregate_metrics(const std::vector<std::vector<ItemId>>& lists,
                             const std::vector<std::vector<ItemId>>& relevant,
                             const ItemGrouping& grouping, const MetricOptions& options,
                             const PreferenceVector& omega) {
  if (lists.size() != relevant.size()) throw std::invalid_argument("lists/relevant size mismatch");
  if (lists.empty()) throw std::invalid_argument("no users to evaluate");
  std::vector<int> ks = options.ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  EvalReport report;
  report.omega = omega;
  report.users_total = lists.size();
  for (const auto& rel : relevant) report.users_ranked += !rel.empty();

  for (int k : ks) {
    MetricRow row;
    row.k = k;
    std::array<double, 2> pooled{0.0, 0.0};
    for (std::size_t u = 0; u < lists.size(); ++u) {
      const auto& list = lists[u];
      if (auto r = recall_at_k(list, relevant[u], k)) {
        row.recall += *r;
        row.f1 += *f1_at_k(list, relevant[u], k);
        row.ndcg += *ndcg_at_k(list, relevant[u], k);
      }
      row.popularity_rate += popularity_rate_at_k(list, grouping, k);
      if (options.kl_mode == KlMode::kPerUser) {
        row.kl += kl_divergence_at_k(list, grouping, k, options.kl_log_base);
      } else {
        auto d = group_distribution_at_k(list, grouping, k);
        pooled[0] += d[0];
        pooled[1] += d[1];
      }
    }
    const auto total = static_cast<double>(report.users_total);
    if (report.users_ranked > 0) {
      const auto ranked = static_cast<double>(report.users_ranked);
      row.recall /= ranked;
      row.f1 /= ranked;
      row.ndcg /= ranked;
    }
    row.popularity_rate /= total;
    if (options.kl_mode == KlMode::kPerUser) {
      row.kl /= total;
    } else {
      row.kl = kl_divergence_percent({pooled[0] / total, pooled[1] / total},
                                     catalogue_distribution(grouping), options.kl_log_base);
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["omega_u"] = report.omega.utility();
  j["omega_f"] = report.omega.fairness();
  j["users_ranked"] = report.users_ranked;
  j["users_total"] = report.users_total;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["K"] = r.k;
    row["recall"] = r.recall;
    row["f1"] = r.f1;
    row["ndcg"] = r.ndcg;
    row["kl_percent"] = r.kl;
    row["popularity_rate_percent"] = r.popularity_rate;
    rows.push_back(std::move(row));
  }
  j["metrics"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_csv_rows(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  for (const auto& r : report.rows) {
    os << report.omega.utility() << ',' << r.k << ',' << r.recall << ',' << r.f1 << ',' << r.ndcg
       << ',' << r.kl << ',' << r.popularity_rate << '\n';
  }
  return os.str();
}

}  // namespace mofir
