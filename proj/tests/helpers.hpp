#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mofir/data.hpp"

namespace mofir::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("mofir_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path movielens_path() {
  return std::filesystem::path(MOFIR_DATA_DIR) / "ml-100k" / "u.data";
}

}  // namespace mofir::testing
