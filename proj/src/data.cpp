#include "mofir/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace mofir {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail_line(std::string_view source, std::size_t line_no,
                            const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line_no << ": " << what;
  throw DataError(os.str());
}

std::int64_t parse_int(std::string_view field, std::string_view source,
                       std::size_t line_no, const char* name) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec == std::errc() && ptr == field.data() + field.size()) return value;
  // Some exports write timestamps as floating point.
  double d = 0.0;
  auto [dptr, dec] = std::from_chars(field.data(), field.data() + field.size(), d);
  if (dec == std::errc() && dptr == field.data() + field.size() && std::isfinite(d) &&
      d == std::floor(d)) {
    return static_cast<std::int64_t>(d);
  }
  fail_line(source, line_no,
            std::string("non-numeric ") + name + " field '" + std::string(field) + "'");
}

double parse_real(std::string_view field, std::string_view source,
                  std::size_t line_no, const char* name) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    fail_line(source, line_no,
              std::string("non-numeric ") + name + " field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

InteractionLog parse_interactions(std::string_view text, const LoadOptions& options,
                                  std::string_view source) {
  InteractionLog log;
  std::unordered_map<std::int64_t, UserId> user_index;
  std::unordered_map<std::int64_t, ItemId> item_index;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fields = split_fields(line, options.delimiter);
    if (fields.size() < 3) {
      fail_line(source, line_no,
                "expected at least 3 fields (user, item, [rating,] timestamp), got " +
                    std::to_string(fields.size()));
    }
    std::int64_t raw_user = parse_int(fields[0], source, line_no, "user");
    std::int64_t raw_item = parse_int(fields[1], source, line_no, "item");
    Interaction row;
    if (fields.size() == 3) {
      row.timestamp = parse_int(fields[2], source, line_no, "timestamp");
    } else {
      row.rating = parse_real(fields[2], source, line_no, "rating");
      row.timestamp = parse_int(fields[3], source, line_no, "timestamp");
    }

    auto [uit, unew] = user_index.try_emplace(raw_user, static_cast<UserId>(log.raw_user_ids.size()));
    if (unew) log.raw_user_ids.push_back(raw_user);
    auto [iit, inew] = item_index.try_emplace(raw_item, static_cast<ItemId>(log.raw_item_ids.size()));
    if (inew) log.raw_item_ids.push_back(raw_item);
    row.user = uit->second;
    row.item = iit->second;
    log.rows.push_back(row);
  }
  return log;
}

InteractionLog load_interactions(const std::filesystem::path& path,
                                 const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read interaction file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("I/O error while reading '" + path.string() + "'");
  std::string text = std::move(buf).str();
  return parse_interactions(text, options, path.string());
}

DatasetStats dataset_stats(const InteractionLog& log) {
  if (log.rows.empty()) throw DataError("dataset_stats: empty interaction list");
  DatasetStats s;
  s.users = log.num_users();
  s.items = log.num_items();
  s.actions = log.rows.size();
  s.density = static_cast<double>(s.actions) /
              (static_cast<double>(s.users) * static_cast<double>(s.items));
  return s;
}

std::vector<UserId> SplitDataset::kept_users() const {
  std::vector<UserId> out;
  for (std::size_t u = 0; u < kept.size(); ++u) {
    if (kept[u]) out.push_back(static_cast<UserId>(u));
  }
  return out;
}

SplitDataset chronological_split(const InteractionLog& log, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DataError("chronological_split: ratio must lie in (0, 1)");
  }
  SplitDataset split;
  split.num_users = log.num_users();
  split.num_items = log.num_items();
  split.users.resize(split.num_users);
  split.kept.assign(split.num_users, false);

  // Row indices grouped per user keep file order.
  std::vector<std::vector<std::size_t>> per_user(split.num_users);
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    per_user[static_cast<std::size_t>(log.rows[i].user)].push_back(i);
  }

  for (std::size_t u = 0; u < split.num_users; ++u) {
    auto& rows = per_user[u];
    const std::size_t n = rows.size();
    if (n < 3) {
      ++split.dropped_users;
      continue;
    }
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return log.rows[a].timestamp < log.rows[b].timestamp;
    });
    auto raw_train = static_cast<std::size_t>(std::round(ratio * static_cast<double>(n)));
    raw_train = std::clamp<std::size_t>(raw_train, 1, n - 1);

    UserSplit& us = split.users[u];
    for (std::size_t k = 0; k + 1 < raw_train; ++k) us.train.push_back(log.rows[rows[k]].item);
    us.validation = log.rows[rows[raw_train - 1]].item;
    for (std::size_t k = raw_train; k < n; ++k) us.test.push_back(log.rows[rows[k]].item);
    split.kept[u] = true;
  }
  return split;
}

std::vector<std::size_t> item_counts(const SplitDataset& split, PopularityScope scope) {
  std::vector<std::size_t> counts(split.num_items, 0);
  for (const auto& us : split.users) {
    for (ItemId i : us.train) ++counts[static_cast<std::size_t>(i)];
    if (scope == PopularityScope::kAllInteractions) {
      if (us.validation) ++counts[static_cast<std::size_t>(*us.validation)];
      for (ItemId i : us.test) ++counts[static_cast<std::size_t>(i)];
    }
  }
  return counts;
}

ItemGrouping group_items_by_popularity(std::span<const std::size_t> counts,
                                       double popular_share) {
  const std::size_t n = counts.size();
  if (n < 5) {
    throw DataError("group_items_by_popularity: need at least 5 items, got " +
                    std::to_string(n));
  }
  std::vector<ItemId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });

  ItemGrouping g;
  g.popular_count = static_cast<std::size_t>(std::floor(popular_share * static_cast<double>(n)));
  if (g.popular_count == 0 || g.popular_count >= n) {
    throw DataError("group_items_by_popularity: popular share leaves a group empty");
  }
  g.group_of.assign(n, ItemGroup::kLongTail);
  for (std::size_t k = 0; k < g.popular_count; ++k) {
    g.group_of[static_cast<std::size_t>(order[k])] = ItemGroup::kPopular;
  }
  g.beta = static_cast<double>(n - g.popular_count) / static_cast<double>(n);
  return g;
}

ItemGrouping group_items_by_popularity(const SplitDataset& split, PopularityScope scope,
                                       double popular_share) {
  auto counts = item_counts(split, scope);
  return group_items_by_popularity(counts, popular_share);
}

std::string split_manifest_json(const SplitDataset& split) {
  // ordered_json keeps users in ascending id order for byte-stable output.
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (UserId u : split.kept_users()) {
    const auto& us = split.users[static_cast<std::size_t>(u)];
    nlohmann::ordered_json entry;
    entry["train"] = us.train;
    entry["val"] = us.validation ? std::vector<ItemId>{*us.validation} : std::vector<ItemId>{};
    entry["test"] = us.test;
    doc[std::to_string(u)] = std::move(entry);
  }
  return doc.dump() + "\n";
}

std::string grouping_csv(const ItemGrouping& grouping) {
  std::ostringstream os;
  os.precision(17);
  os << "item_id,group,beta\n";
  for (std::size_t i = 0; i < grouping.group_of.size(); ++i) {
    os << i << "," << static_cast<int>(grouping.group_of[i]) << "," << grouping.beta << "\n";
  }
  return os.str();
}

}  // namespace mofir
