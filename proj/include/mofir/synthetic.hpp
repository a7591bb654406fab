#pragma once

#include <cstdint>
#include <string>

#include "mofir/data.hpp"

namespace mofir {

/// Planted popularity structure: the first `popular_share * items` item ids
/// are "popular" and each user interacts with each of them independently with
/// probability `p_popular`; every other item with probability `p_long_tail`.
/// Interaction order per user is a random permutation.
struct PlantedConfig {
  std::size_t users = 200;
  std::size_t items = 100;
  double popular_share = 0.2;
  double p_popular = 0.8;
  double p_long_tail = 0.1;
  std::uint64_t seed = 7;
};

InteractionLog make_planted_log(const PlantedConfig& config);

/// Tab-separated "user item rating timestamp" lines using raw ids.
std::string to_tsv(const InteractionLog& log);

}  // namespace mofir
