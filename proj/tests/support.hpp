#pragma once

#include "scriptdet/error.hpp"
#include "scriptdet/geometry.hpp"

#include <doctest.h>

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace support {

/// Runs `fn` and returns the code of the scriptdet::Error it throws.
template <typename Fn>
scriptdet::ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const scriptdet::Error& e) {
    return e.code();
  }
  FAIL("expected a scriptdet::Error");
  return scriptdet::ErrorCode::Io;
}

inline scriptdet::Quad box(double x0, double y0, double x1, double y1) {
  return scriptdet::normalize_quad({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("scriptdet_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace support
