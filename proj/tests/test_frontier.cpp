#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mofir/frontier.hpp"
#include "mofir/synthetic.hpp"

using namespace mofir;

namespace {

using Pt = std::array<double, 2>;

bool dominates(const Pt& q, const Pt& p) {
  return q[0] >= p[0] && q[1] >= p[1] && (q[0] > p[0] || q[1] > p[1]);
}

std::vector<bool> brute_force(const std::vector<Pt>& pts) {
  std::vector<bool> kept(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (dominates(pts[j], pts[i])) kept[i] = false;
    }
  }
  return kept;
}

std::vector<Pt> random_points(std::mt19937_64& rng, int n, bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, 5);
  std::vector<Pt> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back(coarse ? Pt{c(rng) / 5.0, c(rng) * 20.0} : Pt{u(rng), 100 * u(rng)});
  }
  return pts;
}

std::vector<FrontierPoint> as_points(const std::vector<Pt>& pts) {
  std::vector<FrontierPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back({PreferenceVector::from_utility(static_cast<double>(i) / std::max<std::size_t>(1, pts.size() - 1)),
                   pts[i][0], pts[i][1]});
  }
  return out;
}

}  // namespace

TEST_CASE("pareto examples") {
  const std::vector<Pt> three{{1, 0}, {0, 1}, {0.5, 0.5}};
  CHECK(pareto_flags(three) == std::vector<bool>{true, true, true});
  const std::vector<Pt> two{{1, 1}, {0.5, 0.5}};
  CHECK(pareto_flags(two) == std::vector<bool>{true, false});
  const std::vector<Pt> dup{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.4}, {0.4, 0.5}};
  CHECK(pareto_flags(dup) == std::vector<bool>{true, true, false, false});
  CHECK(pareto_flags(std::vector<Pt>{}).empty());
}

TEST_CASE("pareto flags match the brute-force oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng, trial < 100 ? 50 : 1 + trial % 30, trial % 2 == 0);
    const auto flags = pareto_flags(pts);
    REQUIRE(flags == brute_force(pts));

    // Witness: every dropped point is dominated by a kept one.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (flags[i]) continue;
      bool witnessed = false;
      for (std::size_t j = 0; j < pts.size(); ++j) witnessed |= flags[j] && dominates(pts[j], pts[i]);
      CHECK(witnessed);
    }

    // Filtering the kept set again keeps everything.
    const auto fp = as_points(pts);
    const auto kept = pareto_filter(fp);
    const auto again = pareto_filter(kept);
    REQUIRE(again.size() == kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(again[i].objectives() == kept[i].objectives());

    // Permuting the input permutes the kept multiset along with it.
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto sf = pareto_flags(shuffled);
    std::vector<Pt> a, b;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (flags[i]) a.push_back(pts[i]);
      if (sf[i]) b.push_back(shuffled[i]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("frontier CSV output") {
  const auto dir = testing::temp_dir("frontier");
  const std::vector<FrontierPoint> one{{PreferenceVector(0.3, 0.7), 0.123456789, 55.5}};
  emit_frontier(one, pareto_flags(one), dir / "one.csv");
  std::ifstream in(dir / "one.csv");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.rfind(std::string(kFrontierCsvHeader) + "\n", 0) == 0);

  std::mt19937_64 rng(8);
  const auto pts = as_points(random_points(rng, 11, false));
  const auto flags = pareto_flags(pts);
  const auto rows = parse_frontier_csv(frontier_csv(pts, flags));
  REQUIRE(rows.size() == pts.size());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i].point.ndcg20 - pts[i].ndcg20) < 5e-7);
    CHECK(std::abs(rows[i].point.longtail_rate20 - pts[i].longtail_rate20) < 5e-7);
    CHECK(std::abs(rows[i].point.omega.utility() - pts[i].omega.utility()) < 5e-7);
    CHECK(rows[i].pareto == flags[i]);
    kept += rows[i].pareto;
  }
  CHECK(kept == pareto_filter(pts).size());
  CHECK(frontier_csv(pts, flags) == frontier_csv(pts, flags));

  CHECK_THROWS(emit_frontier(std::vector<FrontierPoint>{}, {}, dir / "empty.csv"));
  CHECK_THROWS(emit_frontier(one, pareto_flags(one), dir / "no" / "such" / "dir" / "x.csv"));
  CHECK_THROWS(parse_frontier_csv("wrong,header\n"));
  CHECK_THROWS(parse_frontier_csv(std::string(kFrontierCsvHeader) + "\n1,0,0.5\n"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep evaluates one checkpoint per preference") {
  PlantedConfig pc;
  pc.users = 30;
  const auto split = chronological_split(make_planted_log(pc));
  const auto grouping = group_items_by_popularity(split);
  RecEnvironment env(split, grouping);
  MfConfig mf;
  mf.epochs = 2;
  const auto emb = pretrain_mf(split, mf);
  NetworkSpec spec;
  spec.actor_hidden = {16};
  spec.critic_hidden = {16};
  const Agent agent(spec, 9);

  const std::vector<PreferenceVector> single{PreferenceVector(1, 0)};
  const auto one = sweep(agent, env, emb, single);
  REQUIRE(one.size() == 1);
  const auto direct = frontier_point(evaluate(agent, PreferenceVector(1, 0), env, emb));
  CHECK(one[0].ndcg20 == direct.ndcg20);
  CHECK(one[0].longtail_rate20 == direct.longtail_rate20);

  const auto grid = preference_grid(11);
  const auto pts = sweep(agent, env, emb, grid);
  REQUIRE(pts.size() == 11);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].omega == grid[i]);
    CHECK(pts[i].longtail_rate20 >= 0.0);
    CHECK(pts[i].longtail_rate20 <= 100.0);
    CHECK(std::isfinite(pts[i].ndcg20));
  }

  // K = 20 is added even when the options leave it out.
  EvalOptions opt;
  opt.metrics.ks = {5};
  const auto extra = sweep(agent, env, emb, single, opt);
  CHECK(extra[0].ndcg20 == direct.ndcg20);
}
