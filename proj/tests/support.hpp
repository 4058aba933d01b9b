#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef GPTUTOR_SOURCE_DIR
#error "GPTUTOR_SOURCE_DIR must be defined by the build"
#endif

namespace gptutor::support {

inline std::filesystem::path source_dir() { return GPTUTOR_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gptutor-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  void write(const std::string& rel, const std::string& text) const { write_text(path_ / rel, text); }

 private:
  std::filesystem::path path_;
};

// Copies the two-file fixture workspace into a fresh temp dir.
inline void copy_attendee(const TempDir& dir) {
  for (const char* name : {"main.py", "attendeeManager.py"}) {
    dir.write(name, read_text(fixture(std::string("attendee/") + name)));
  }
}

template <typename F>
double seconds_of(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace gptutor::support
