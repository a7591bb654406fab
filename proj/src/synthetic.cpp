#include "mofir/synthetic.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace mofir {

InteractionLog make_planted_log(const PlantedConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto popular = static_cast<std::size_t>(config.popular_share * static_cast<double>(config.items));

  InteractionLog log;
  for (std::size_t u = 0; u < config.users; ++u) log.raw_user_ids.push_back(static_cast<std::int64_t>(u));
  for (std::size_t i = 0; i < config.items; ++i) log.raw_item_ids.push_back(static_cast<std::int64_t>(i));

  std::int64_t clock = 1'000'000'000;
  for (std::size_t u = 0; u < config.users; ++u) {
    std::vector<ItemId> liked;
    for (std::size_t i = 0; i < config.items; ++i) {
      const double p = i < popular ? config.p_popular : config.p_long_tail;
      if (coin(rng) < p) liked.push_back(static_cast<ItemId>(i));
    }
    std::shuffle(liked.begin(), liked.end(), rng);
    for (ItemId item : liked) {
      log.rows.push_back(Interaction{static_cast<UserId>(u), item, 1.0, clock});
      clock += 60;
    }
  }
  return log;
}

std::string to_tsv(const InteractionLog& log) {
  std::ostringstream os;
  for (const auto& r : log.rows) {
    os << log.raw_user_ids[static_cast<std::size_t>(r.user)] << '\t'
       << log.raw_item_ids[static_cast<std::size_t>(r.item)] << '\t' << r.rating.value_or(1.0)
       << '\t' << r.timestamp << '\n';
  }
  return os.str();
}

}  // namespace mofir
