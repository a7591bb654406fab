#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "mofir/data.hpp"
#include "mofir/synthetic.hpp"

using namespace mofir;

namespace {

std::string user_events(int raw_user, int n, int first_item = 100) {
  std::ostringstream os;
  for (int k = 0; k < n; ++k) os << raw_user << '\t' << first_item + k << "\t5\t" << 1000 + k << '\n';
  return os.str();
}

}  // namespace

TEST_CASE("MovieLens-100K loads with the published counts") {
  const auto log = load_interactions(testing::movielens_path());
  CHECK(log.rows.size() == 100000);
  CHECK(log.num_users() == 943);
  CHECK(log.num_items() == 1682);
  const auto stats = dataset_stats(log);
  CHECK(stats.users == 943);
  CHECK(stats.items == 1682);
  CHECK(stats.actions == 100000);
  CHECK(stats.density == doctest::Approx(0.06305).epsilon(1e-5));
  CHECK(log.rows.front().rating.value() == 3.0);
  CHECK(log.raw_user_ids.front() == 196);
}

TEST_CASE("empty input gives an empty log") {
  const auto log = parse_interactions("");
  CHECK(log.rows.empty());
  CHECK(log.num_users() == 0);
  CHECK(log.num_items() == 0);
  CHECK_THROWS_AS(dataset_stats(log), DataError);
}

TEST_CASE("ids are re-indexed densely by first appearance") {
  const auto log = parse_interactions("7\t1\t10\n7\t2\t11\n9\t1\t12\n");
  REQUIRE(log.rows.size() == 3);
  CHECK(log.rows[0].user == 0);
  CHECK(log.rows[1].user == 0);
  CHECK(log.rows[2].user == 1);
  CHECK(log.raw_user_ids == std::vector<std::int64_t>{7, 9});
  CHECK(log.rows[2].item == 0);
  CHECK_FALSE(log.rows[0].rating.has_value());
  CHECK(log.rows[0].timestamp == 10);
}

TEST_CASE("comma delimiter and blank lines") {
  const auto log = parse_interactions("1,2,4.5,100\n\n1,3,2,101\n", {','});
  REQUIRE(log.rows.size() == 2);
  CHECK(log.rows[0].rating.value() == 4.5);
  CHECK(log.rows[1].timestamp == 101);
}

TEST_CASE("malformed input is reported with its line number") {
  try {
    parse_interactions("1\t2\t3\n1\t2\n", {}, "bad.tsv");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.tsv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_interactions("1\tx\t3\n"), DataError);
  CHECK_THROWS_AS(parse_interactions("1\t2\t3\tnope\n"), DataError);
  CHECK_THROWS_AS(load_interactions("/nonexistent/file.tsv"), DataError);
}

TEST_CASE("dataset_stats arithmetic") {
  auto one = parse_interactions("1\t1\t1\n");
  CHECK(dataset_stats(one).density == 1.0);
  auto four = parse_interactions("1\t1\t1\n1\t2\t2\n2\t3\t3\n2\t4\t4\n");
  const auto s = dataset_stats(four);
  CHECK(s.users == 2);
  CHECK(s.items == 4);
  CHECK(s.density == 0.5);
}

TEST_CASE("chronological split sizes") {
  const auto log = parse_interactions(user_events(1, 10) + user_events(2, 5) + user_events(3, 2));
  const auto split = chronological_split(log);
  REQUIRE(split.num_users == 3);
  CHECK(split.users[0].train.size() == 7);
  CHECK(split.users[0].validation.has_value());
  CHECK(split.users[0].test.size() == 2);
  CHECK(split.users[1].train.size() == 3);
  CHECK(split.users[1].test.size() == 1);
  CHECK_FALSE(split.kept[2]);
  CHECK(split.dropped_users == 1);
  CHECK(split.kept_users() == std::vector<UserId>{0, 1});
}

TEST_CASE("split orders by timestamp with file order breaking ties") {
  const auto log = parse_interactions("1\t10\t50\n1\t11\t20\n1\t12\t20\n1\t13\t10\n1\t14\t99\n");
  const auto split = chronological_split(log);
  const auto& u = split.users[0];
  // timestamps: 13@10, 11@20, 12@20, 10@50, 14@99 -> dense items 3,1,2,0,4
  CHECK(u.train == std::vector<ItemId>{3, 1, 2});
  CHECK(u.validation == ItemId{0});
  CHECK(u.test == std::vector<ItemId>{4});
}

TEST_CASE("split round-trips every user's sequence") {
  PlantedConfig pc;
  pc.users = 60;
  pc.items = 40;
  const auto log = make_planted_log(pc);
  const auto split = chronological_split(log);
  std::vector<std::vector<std::pair<std::int64_t, ItemId>>> seq(log.num_users());
  for (const auto& r : log.rows) seq[static_cast<std::size_t>(r.user)].push_back({r.timestamp, r.item});
  for (std::size_t u = 0; u < seq.size(); ++u) {
    std::stable_sort(seq[u].begin(), seq[u].end(),
                     [](auto a, auto b) { return a.first < b.first; });
    if (seq[u].size() < 3) {
      CHECK_FALSE(split.kept[u]);
      continue;
    }
    const auto& us = split.users[u];
    std::vector<ItemId> joined = us.train;
    joined.push_back(*us.validation);
    joined.insert(joined.end(), us.test.begin(), us.test.end());
    std::vector<ItemId> expect;
    for (auto [t, i] : seq[u]) expect.push_back(i);
    CHECK(joined == expect);
  }
}

TEST_CASE("popularity grouping on MovieLens item count") {
  std::vector<std::size_t> counts(1682);
  std::iota(counts.begin(), counts.end(), 0);
  const auto g = group_items_by_popularity(counts);
  CHECK(g.popular_count == 336);
  CHECK(g.long_tail_count() == 1346);
  CHECK(g.beta == doctest::Approx(1346.0 / 1682.0));
}

TEST_CASE("grouping examples and tie rule") {
  const std::vector<std::size_t> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto g = group_items_by_popularity(ten);
  CHECK(g.popular_count == 2);
  CHECK(g.is_popular(9));
  CHECK(g.is_popular(8));
  CHECK(g.is_long_tail(7));
  CHECK(g.beta == 0.8);

  const std::vector<std::size_t> flat(5, 3);
  const auto t = group_items_by_popularity(flat);
  CHECK(t.popular_count == 1);
  CHECK(t.is_popular(0));
  for (ItemId i = 1; i < 5; ++i) CHECK(t.is_long_tail(i));

  CHECK_THROWS_AS(group_items_by_popularity(std::vector<std::size_t>(4, 1)), DataError);
}

TEST_CASE("grouping is a count-ordered partition") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> counts(5 + rng() % 200);
    for (auto& c : counts) c = rng() % 7;
    const auto g = group_items_by_popularity(counts);
    CHECK(g.popular_count == counts.size() / 5);
    std::size_t min_pop = SIZE_MAX, max_lt = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (g.is_popular(static_cast<ItemId>(i))) {
        min_pop = std::min(min_pop, counts[i]);
      } else {
        max_lt = std::max(max_lt, counts[i]);
      }
    }
    CHECK(min_pop >= max_lt);
    // Equal counts straddling the boundary: the popular one has the lower id.
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[i] == counts[j] && g.is_popular(static_cast<ItemId>(i)) &&
            g.is_long_tail(static_cast<ItemId>(j))) {
          CHECK(i < j);
        }
      }
    }
  }
}

TEST_CASE("grouping counts training interactions by default") {
  // Item 0 is popular in train; raw item 1 (dense id 4) only appears in test events.
  std::string text;
  for (int u = 0; u < 5; ++u) {
    text += std::to_string(u) + "\t0\t1\n";
    text += std::to_string(u) + "\t2\t2\n";
    text += std::to_string(u) + "\t3\t3\n";
    text += std::to_string(u) + "\t4\t4\n";
    text += std::to_string(u) + "\t1\t5\n";
  }
  const auto split = chronological_split(parse_interactions(text));
  const auto train_only = group_items_by_popularity(split);
  CHECK(train_only.is_popular(0));
  const auto counts = item_counts(split, PopularityScope::kAllInteractions);
  CHECK(counts[4] == 5);
  CHECK(item_counts(split, PopularityScope::kTrainOnly)[4] == 0);
  CHECK(train_only.is_long_tail(4));
}

TEST_CASE("manifest and grouping outputs are deterministic") {
  const auto log = make_planted_log({});
  const auto a = chronological_split(log);
  const auto b = chronological_split(make_planted_log({}));
  CHECK(split_manifest_json(a) == split_manifest_json(b));
  const auto j = nlohmann::json::parse(split_manifest_json(a));
  CHECK(j.contains("0"));
  CHECK(j["0"].contains("train"));
  CHECK(j["0"]["val"].size() == 1);
  const auto csv = grouping_csv(group_items_by_popularity(a));
  CHECK(csv.rfind("item_id,group,beta\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
}

TEST_CASE("planted generator respects its structure") {
  const auto log = make_planted_log({});
  CHECK(log.num_users() == 200);
  CHECK(log.num_items() == 100);
  std::size_t pop = 0, lt = 0;
  for (const auto& r : log.rows) (log.raw_item_ids[r.item] < 20 ? pop : lt)++;
  CHECK(static_cast<double>(pop) / (200 * 20) == doctest::Approx(0.8).epsilon(0.05));
  CHECK(static_cast<double>(lt) / (200 * 80) == doctest::Approx(0.1).epsilon(0.15));
  const auto reparsed = parse_interactions(to_tsv(log));
  CHECK(reparsed.rows.size() == log.rows.size());
}
