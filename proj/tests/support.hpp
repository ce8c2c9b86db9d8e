#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "ltbench/rng.hpp"
#include "ltbench/tunnel.hpp"

namespace lt::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ltbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Uniformly random valid tunnel inputs.
inline TunnelInputs random_inputs(CounterRng& rng) {
  TunnelInputs x;
  x.red = rng.uniform(0.0, 255.0);
  x.green = rng.uniform(0.0, 255.0);
  x.blue = rng.uniform(0.0, 255.0);
  x.theta1 = rng.uniform(-180.0, 180.0);
  x.theta2 = rng.uniform(-180.0, 180.0);
  for (int j = 0; j < 3; ++j) {
    x.diode_ir[j] = static_cast<int>(rng.uniform_index(3));
    x.diode_vis[j] = static_cast<int>(rng.uniform_index(2));
    x.t_ir[j] = static_cast<int>(rng.uniform_index(4));
    x.t_vis[j] = static_cast<int>(rng.uniform_index(4));
  }
  x.v_c = kReferenceVoltages[rng.uniform_index(3)];
  x.v_angle_1 = kReferenceVoltages[rng.uniform_index(3)];
  x.v_angle_2 = kReferenceVoltages[rng.uniform_index(3)];
  return x;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace lt::test
