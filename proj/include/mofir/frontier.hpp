#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mofir/evaluate.hpp"

namespace mofir {

struct FrontierPoint {
  PreferenceVector omega;
  double ndcg20 = 0.0;
  double longtail_rate20 = 0.0;  // percent, 100 - popularity rate @20

  std::array<double, 2> objectives() const { return {ndcg20, longtail_rate20}; }
};

/// Evaluates the same agent at every preference of `grid`, in order.
std::vector<FrontierPoint> sweep(const Agent& agent, const RecEnvironment& env,
                                 const EmbeddingTable& embeddings,
                                 std::span<const PreferenceVector> grid,
                                 const EvalOptions& options = {});

FrontierPoint frontier_point(const EvalReport& report);

/// kept[i] is true iff no other point is at least as good on both objectives
/// and strictly better on one. Both objectives are maximised; identical
/// points never dominate each other.
std::vector<bool> pareto_flags(std::span<const std::array<double, 2>> points);
std::vector<bool> pareto_flags(std::span<const FrontierPoint> points);

/// Kept points in input order.
std::vector<FrontierPoint> pareto_filter(std::span<const FrontierPoint> points);

inline constexpr std::string_view kFrontierCsvHeader =
    "omega_utility,omega_fairness,ndcg20,longtail_rate20,pareto";

struct FrontierRow {
  FrontierPoint point;
  bool pareto = false;
};

std::string frontier_csv(std::span<const FrontierPoint> points, const std::vector<bool>& kept);
void emit_frontier(std::span<const FrontierPoint> points, const std::vector<bool>& kept,
                   const std::filesystem::path& path);
std::vector<FrontierRow> parse_frontier_csv(const std::string& text);

}  // namespace mofir
