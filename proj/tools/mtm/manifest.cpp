// SPDX-License-Identifier: Apache-2.0
#include "manifest.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <memory>

#include <openssl/evp.h>

#include "mtm/error.hpp"

namespace mtm::cli {

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw IoError("sha1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return git_blob_hash(content);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

RunManifest::RunManifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_.push_back({role, path.string(), git_blob_hash_file(path)});
}

void RunManifest::add_output(const std::string& role, const std::filesystem::path& path) {
  outputs_.push_back({role, path.filename().string(), git_blob_hash_file(path)});
}

void RunManifest::add_timing(const std::string& phase, double seconds) { timings_.emplace_back(phase, seconds); }

nlohmann::json RunManifest::to_json() const {
  auto entries = [](const std::vector<Entry>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : list) out.push_back({{"role", e.role}, {"path", e.path}, {"git_blob_sha1", e.hash}});
    return out;
  };
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [phase, s] : timings_) timings[phase] = s;
  nlohmann::json j = {{"command", command_}, {"seed", seed_},          {"config", config_},
                      {"inputs", entries(inputs_)}, {"outputs", entries(outputs_)}, {"timings_s", timings}};
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  return j;
}

std::filesystem::path RunManifest::write(const std::filesystem::path& out_dir) const {
  const auto path = out_dir / (command_ + ".manifest.json");
  write_file_atomic(path, to_json().dump(2) + "\n");
  return path;
}

double Stopwatch::lap() {
  const auto now = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(now - start_).count();
  start_ = now;
  return s;
}

}  // namespace mtm::cli
