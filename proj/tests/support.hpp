#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "vkf/calib.hpp"

namespace vkf::test {

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vkf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void check_close(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol) {
  CHECK((a - b).norm() <= tol);
}

}  // namespace vkf::test
