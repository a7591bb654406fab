#include "mofir/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace mofir {

void init_logging() {
  auto logger = spdlog::get("mofir");
  if (!logger) logger = spdlog::stderr_color_mt("mofir");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("MOFIR_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("MOFIR_LOG='{}' not recognised, using info", level);
  }
}

}  // namespace mofir
