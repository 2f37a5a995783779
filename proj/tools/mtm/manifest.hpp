// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtm::cli {

/// Hex SHA-1 of "blob <size>\0" + content, as git computes object ids.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

class RunManifest {
 public:
  RunManifest(std::string command, std::uint64_t seed);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::string& role, const std::filesystem::path& path);
  void add_timing(const std::string& phase, double seconds);
  void set_extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  nlohmann::json to_json() const;
  /// <out_dir>/<command>.manifest.json
  std::filesystem::path write(const std::filesystem::path& out_dir) const;

 private:
  struct Entry {
    std::string role;
    std::string path;
    std::string hash;
  };
  std::string command_;
  std::uint64_t seed_;
  nlohmann::json config_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::vector<Entry> inputs_;
  std::vector<Entry> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

/// Seconds since construction or the last lap().
class Stopwatch {
 public:
  double lap();

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace mtm::cli
