#include "mofir/frontier.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace mofir {

FrontierPoint frontier_point(const EvalReport& report) {
  const MetricRow& row = report.at(20);
  return {report.omega, row.ndcg, 100.0 - row.popularity_rate};
}

std::vector<FrontierPoint> sweep(const Agent& agent, const RecEnvironment& env,
                                 const EmbeddingTable& embeddings,
                                 std::span<const PreferenceVector> grid,
                                 const EvalOptions& options) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty preference grid");
  EvalOptions opts = options;
  if (std::find(opts.metrics.ks.begin(), opts.metrics.ks.end(), 20) == opts.metrics.ks.end()) {
    opts.metrics.ks.push_back(20);
    std::sort(opts.metrics.ks.begin(), opts.metrics.ks.end());
  }
  std::vector<FrontierPoint> out;
  for (const auto& omega : grid) out.push_back(frontier_point(evaluate(agent, omega, env, embeddings, opts)));
  return out;
}

std::vector<bool> pareto_flags(std::span<const std::array<double, 2>> points) {
  // Walk groups of equal first objective from best to worst. A point is
  // dominated by an earlier group whose best second objective is >= its own,
  // or by a member of its own group with a strictly larger second objective.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a][0] > points[b][0]; });
  std::vector<bool> kept(points.size(), false);
  double best_before = -std::numeric_limits<double>::infinity();
  bool any_before = false;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    double group_best = -std::numeric_limits<double>::infinity();
    while (end < order.size() && points[order[end]][0] == points[order[g]][0]) {
      group_best = std::max(group_best, points[order[end]][1]);
      ++end;
    }
    for (std::size_t j = g; j < end; ++j) {
      const double b = points[order[j]][1];
      kept[order[j]] = !(any_before && best_before >= b) && !(group_best > b);
    }
    best_before = std::max(best_before, group_best);
    any_before = true;
    g = end;
  }
  return kept;
}

std::vector<bool> pareto_flags(std::span<const FrontierPoint> points) {
  std::vector<std::array<double, 2>> objectives;
  for (const auto& p : points) objectives.push_back(p.objectives());
  return pareto_flags(std::span<const std::array<double, 2>>(objectives));
}

std::vector<FrontierPoint> pareto_filter(std::span<const FrontierPoint> points) {
  const auto kept = pareto_flags(points);
  std::vector<FrontierPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (kept[i]) out.push_back(points[i]);
  }
  return out;
}

std::string frontier_csv(std::span<const FrontierPoint> points, const std::vector<bool>& kept) {
  if (kept.size() != points.size()) throw std::invalid_argument("frontier_csv: flag count mismatch");
  std::ostringstream os;
  os.precision(12);
  os << kFrontierCsvHeader << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    os << p.omega.utility() << ',' << p.omega.fairness() << ',' << p.ndcg20 << ','
       << p.longtail_rate20 << ',' << (kept[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

void emit_frontier(std::span<const FrontierPoint> points, const std::vector<bool>& kept,
                   const std::filesystem::path& path) {
  if (points.empty()) throw std::invalid_argument("emit_frontier: no points");
  const std::string text = frontier_csv(points, kept);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<FrontierRow> parse_frontier_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kFrontierCsvHeader) {
    throw std::invalid_argument("frontier CSV: unexpected header");
  }
  std::vector<FrontierRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(fields, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 5) throw std::invalid_argument("frontier CSV: expected 5 fields: " + line);
    FrontierRow r;
    r.point.omega = PreferenceVector(v[0], v[1]);
    r.point.ndcg20 = v[2];
    r.point.longtail_rate20 = v[3];
    r.pareto = v[4] != 0.0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mofir
