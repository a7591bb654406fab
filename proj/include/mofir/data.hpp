#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mofir {

using UserId = std::int32_t;
using ItemId = std::int32_t;

/// Raised for any problem reading or interpreting an interaction log.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  std::optional<double> rating;
  std::int64_t timestamp = 0;
};

/// Interactions with dense ids plus the tables mapping dense ids back to
/// the raw ids found in the file. Dense ids follow order of first appearance.
struct InteractionLog {
  std::vector<Interaction> rows;
  std::vector<std::int64_t> raw_user_ids;
  std::vector<std::int64_t> raw_item_ids;

  std::size_t num_users() const { return raw_user_ids.size(); }
  std::size_t num_items() const { return raw_item_ids.size(); }
};

struct LoadOptions {
  char delimiter = '\t';
};

InteractionLog load_interactions(const std::filesystem::path& path,
                                 const LoadOptions& options = {});

/// Parses an in-memory log; `source` is only used in error messages.
InteractionLog parse_interactions(std::string_view text,
                                  const LoadOptions& options = {},
                                  std::string_view source = "<memory>");

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t actions = 0;
  double density = 0.0;  // fraction, not percent
};

DatasetStats dataset_stats(const InteractionLog& log);

struct UserSplit {
  std::vector<ItemId> train;
  std::optional<ItemId> validation;
  std::vector<ItemId> test;
};

struct SplitDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  /// Indexed by dense user id. Dropped users have `kept == false` and empty
  /// lists.
  std::vector<UserSplit> users;
  std::vector<bool> kept;
  std::size_t dropped_users = 0;

  std::vector<UserId> kept_users() const;
};

/// Per-user chronological split. Each user's events are ordered by
/// (timestamp, file order); raw train size is round(ratio * n) clamped to
/// [1, n - 1], the last raw train item becomes the validation item. Users with
/// fewer than three events are dropped.
SplitDataset chronological_split(const InteractionLog& log,
                                 double ratio = 0.8);

enum class ItemGroup : std::uint8_t { kPopular = 0, kLongTail = 1 };

struct ItemGrouping {
  std::vector<ItemGroup> group_of;
  double beta = 0.0;  // |long tail| / |items|
  std::size_t popular_count = 0;

  bool is_popular(ItemId item) const {
    return group_of[static_cast<std::size_t>(item)] == ItemGroup::kPopular;
  }
  bool is_long_tail(ItemId item) const { return !is_popular(item); }
  std::size_t num_items() const { return group_of.size(); }
  std::size_t long_tail_count() const { return group_of.size() - popular_count; }
};

enum class PopularityScope { kTrainOnly, kAllInteractions };

/// Top floor(popular_share * |I|) items by interaction count form the popular
/// group; ties go to the lower item id.
ItemGrouping group_items_by_popularity(std::span<const std::size_t> counts,
                                       double popular_share = 0.2);

/// Counts train items (scope kTrainOnly) or every split event (kAllInteractions).
std::vector<std::size_t> item_counts(const SplitDataset& split,
                                     PopularityScope scope);

ItemGrouping group_items_by_popularity(const SplitDataset& split,
                                       PopularityScope scope = PopularityScope::kTrainOnly,
                                       double popular_share = 0.2);

/// {"<user>": {"train": [...], "val": [...], "test": [...]}} keyed by dense id.
std::string split_manifest_json(const SplitDataset& split);

/// "item_id,group,beta" CSV with one row per item.
std::string grouping_csv(const ItemGrouping& grouping);

}  // namespace mofir
