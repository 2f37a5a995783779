// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtm/encoder.hpp"
#include "mtm/retrieval.hpp"

namespace mtm {

enum class MemoryInit { kKMeans, kRandom };

/// Every hyperparameter of the pipeline. Defaults follow the reference
/// setting except where noted.
struct Config {
  std::size_t k1 = 50;  // BM25 candidates per claim
  std::size_t k2 = 3;   // key sentences per article
  std::size_t memory_size = 20;

  double lambda_r = 0.01;  // drift penalty during ROT pretraining
  double lambda_q = 0.6;   // claim-sentence similarity weight
  double lambda_p = 0.4;   // pattern similarity weight
  double lambda_m = 0.3;   // pattern step size

  /// Residual-norm quantiles for the validity band, unless absolute
  /// thresholds are given.
  double q_low = 0.45;
  double q_high = 0.55;
  std::optional<double> t_low;
  std::optional<double> t_high;

  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 5;
  std::size_t patience = 2;
  double pos_weight_cap = 10.0;
  double val_fraction = 0.15;
  std::uint64_t seed = 13;

  // ROT pretraining.
  double rot_learning_rate = 1e-3;
  std::size_t rot_batch_size = 32;
  std::size_t rot_epochs = 2;
  std::size_t rot_max_pairs = 12000;
  std::size_t rot_holdout_pairs = 1500;
  /// Share of the pair budget reserved for pairs with bigram overlap.
  double rot_overlap_share = 0.5;

  /// Record every key sentence of a pair in the feedback ledger instead of
  /// only the top one.
  bool record_all_key_sentences = false;

  /// Start every interaction block from the pretrained ROT block instead of
  /// a random draw.
  bool arp_from_rot = true;

  // Component switches used by the ablations.
  bool rouge_guidance = true;
  MemoryInit memory_init = MemoryInit::kKMeans;
  bool memory_update = true;
  bool use_memory = true;
  bool weighted_pool = true;

  EncoderConfig encoder;
  Bm25Params bm25;

  /// ConfigError on any inconsistency. vocab_size is not checked here.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys raise ConfigError.
  static Config from_json(const nlohmann::json& j);
  static Config load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Names accepted by apply_variant, "full" first.
const std::vector<std::string>& variant_names();

/// Switches off one component. ConfigError on an unknown name.
Config apply_variant(Config config, const std::string& variant);

}  // namespace mtm
