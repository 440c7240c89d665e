#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace testsupport {

/// Unique scratch directory, removed recursively on destruction.
class TmpDir {
public:
  explicit TmpDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("despeckle_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TmpDir(const TmpDir&) = delete;
  TmpDir& operator=(const TmpDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const {
    return sub.empty() ? path_.string() : (path_ / sub).string();
  }

private:
  std::filesystem::path path_;
};

}  // namespace testsupport
