// SPDX-License-Identifier: Apache-2.0
#include "mtm/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "mtm/error.hpp"

namespace mtm {
namespace {

using json = nlohmann::json;

double get_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: \"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config: \"" + key + "\" must be finite");
  return x;
}

std::size_t get_size(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config: \"" + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config: \"" + key + "\" must be a boolean");
  return v.get<bool>();
}

std::string memory_init_name(MemoryInit m) { return m == MemoryInit::kKMeans ? "kmeans" : "random"; }

using Setter = std::function<void(Config&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> k = {
      {"k1", [](Config& c, const json& v, const std::string& n) { c.k1 = get_size(v, n); }},
      {"k2", [](Config& c, const json& v, const std::string& n) { c.k2 = get_size(v, n); }},
      {"memory_size", [](Config& c, const json& v, const std::string& n) { c.memory_size = get_size(v, n); }},
      {"lambda_r", [](Config& c, const json& v, const std::string& n) { c.lambda_r = get_double(v, n); }},
      {"lambda_q", [](Config& c, const json& v, const std::string& n) { c.lambda_q = get_double(v, n); }},
      {"lambda_p", [](Config& c, const json& v, const std::string& n) { c.lambda_p = get_double(v, n); }},
      {"lambda_m", [](Config& c, const json& v, const std::string& n) { c.lambda_m = get_double(v, n); }},
      {"q_low", [](Config& c, const json& v, const std::string& n) { c.q_low = get_double(v, n); }},
      {"q_high", [](Config& c, const json& v, const std::string& n) { c.q_high = get_double(v, n); }},
      {"t_low",
       [](Config& c, const json& v, const std::string& n) {
         c.t_low = v.is_null() ? std::nullopt : std::optional<double>(get_double(v, n));
       }},
      {"t_high",
       [](Config& c, const json& v, const std::string& n) {
         c.t_high = v.is_null() ? std::nullopt : std::optional<double>(get_double(v, n));
       }},
      {"learning_rate", [](Config& c, const json& v, const std::string& n) { c.learning_rate = get_double(v, n); }},
      {"batch_size", [](Config& c, const json& v, const std::string& n) { c.batch_size = get_size(v, n); }},
      {"epochs", [](Config& c, const json& v, const std::string& n) { c.epochs = get_size(v, n); }},
      {"patience", [](Config& c, const json& v, const std::string& n) { c.patience = get_size(v, n); }},
      {"pos_weight_cap", [](Config& c, const json& v, const std::string& n) { c.pos_weight_cap = get_double(v, n); }},
      {"val_fraction", [](Config& c, const json& v, const std::string& n) { c.val_fraction = get_double(v, n); }},
      {"seed", [](Config& c, const json& v, const std::string& n) { c.seed = get_size(v, n); }},
      {"rot_learning_rate",
       [](Config& c, const json& v, const std::string& n) { c.rot_learning_rate = get_double(v, n); }},
      {"rot_batch_size", [](Config& c, const json& v, const std::string& n) { c.rot_batch_size = get_size(v, n); }},
      {"rot_epochs", [](Config& c, const json& v, const std::string& n) { c.rot_epochs = get_size(v, n); }},
      {"rot_max_pairs", [](Config& c, const json& v, const std::string& n) { c.rot_max_pairs = get_size(v, n); }},
      {"rot_holdout_pairs",
       [](Config& c, const json& v, const std::string& n) { c.rot_holdout_pairs = get_size(v, n); }},
      {"rot_overlap_share",
       [](Config& c, const json& v, const std::string& n) { c.rot_overlap_share = get_double(v, n); }},
      {"record_all_key_sentences",
       [](Config& c, const json& v, const std::string& n) { c.record_all_key_sentences = get_bool(v, n); }},
      {"rouge_guidance", [](Config& c, const json& v, const std::string& n) { c.rouge_guidance = get_bool(v, n); }},
      {"memory_init",
       [](Config& c, const json& v, const std::string& n) {
         if (v == "kmeans") {
           c.memory_init = MemoryInit::kKMeans;
         } else if (v == "random") {
           c.memory_init = MemoryInit::kRandom;
         } else {
           throw ConfigError("config: \"" + n + "\" must be \"kmeans\" or \"random\"");
         }
       }},
      {"memory_update", [](Config& c, const json& v, const std::string& n) { c.memory_update = get_bool(v, n); }},
      {"use_memory", [](Config& c, const json& v, const std::string& n) { c.use_memory = get_bool(v, n); }},
      {"weighted_pool", [](Config& c, const json& v, const std::string& n) { c.weighted_pool = get_bool(v, n); }},
      {"arp_from_rot", [](Config& c, const json& v, const std::string& n) { c.arp_from_rot = get_bool(v, n); }},
      {"dim", [](Config& c, const json& v, const std::string& n) { c.encoder.dim = get_size(v, n); }},
      {"heads", [](Config& c, const json& v, const std::string& n) { c.encoder.heads = get_size(v, n); }},
      {"arp_layers", [](Config& c, const json& v, const std::string& n) { c.encoder.arp_layers = get_size(v, n); }},
      {"max_len", [](Config& c, const json& v, const std::string& n) { c.encoder.max_len = get_size(v, n); }},
      {"vocab_size", [](Config& c, const json& v, const std::string& n) { c.encoder.vocab_size = get_size(v, n); }},
      {"ffn_mult", [](Config& c, const json& v, const std::string& n) { c.encoder.ffn_mult = get_size(v, n); }},
      {"pattern_in_feature",
       [](Config& c, const json& v, const std::string& n) { c.encoder.pattern_in_feature = get_bool(v, n); }},
      {"bm25_k", [](Config& c, const json& v, const std::string& n) { c.bm25.k = get_double(v, n); }},
      {"bm25_b", [](Config& c, const json& v, const std::string& n) { c.bm25.b = get_double(v, n); }},
  };
  return k;
}

}  // namespace

void Config::validate() const {
  if (k1 == 0) throw ConfigError("config: k1 must be positive");
  if (k2 == 0) throw ConfigError("config: k2 must be positive");
  if (use_memory && memory_size == 0) throw ConfigError("config: memory_size must be positive");
  for (const auto& [name, v] : {std::pair{"lambda_r", lambda_r}, std::pair{"lambda_q", lambda_q},
                                std::pair{"lambda_p", lambda_p}, std::pair{"lambda_m", lambda_m}}) {
    if (v < 0.0) throw ConfigError(std::string("config: ") + name + " must be non-negative");
  }
  if (std::abs(lambda_q + lambda_p - 1.0) > 1e-9) {
    throw ConfigError("config: lambda_q + lambda_p must equal 1 (got " + std::to_string(lambda_q + lambda_p) + ")");
  }
  if (t_low.has_value() != t_high.has_value()) {
    throw ConfigError("config: t_low and t_high must be given together");
  }
  if (t_low && !(*t_low < *t_high)) throw ConfigError("config: t_low must be below t_high");
  if (!(0.0 <= q_low && q_low < q_high && q_high <= 1.0)) {
    throw ConfigError("config: quantiles must satisfy 0 <= q_low < q_high <= 1");
  }
  if (!(learning_rate > 0.0) || !(rot_learning_rate > 0.0)) {
    throw ConfigError("config: learning rates must be positive");
  }
  if (batch_size == 0 || rot_batch_size == 0) throw ConfigError("config: batch sizes must be positive");
  if (!(rot_overlap_share >= 0.0 && rot_overlap_share <= 1.0)) {
    throw ConfigError("config: rot_overlap_share must lie in [0, 1]");
  }
  if (pos_weight_cap < 1.0) throw ConfigError("config: pos_weight_cap must be at least 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("config: val_fraction must lie in [0, 1)");
  if (!use_memory && lambda_p != 0.0) throw ConfigError("config: lambda_p must be 0 without the memory bank");
  if (!use_memory && encoder.pattern_in_feature) {
    throw ConfigError("config: pattern_in_feature requires the memory bank");
  }
  if (bm25.k < 0.0 || bm25.b < 0.0 || bm25.b > 1.0) throw ConfigError("config: invalid BM25 parameters");
  if (encoder.dim == 0 || encoder.heads == 0 || encoder.dim % encoder.heads != 0) {
    throw ConfigError("config: dim must be a positive multiple of heads");
  }
  if (encoder.arp_layers == 0 || encoder.ffn_mult == 0) throw ConfigError("config: invalid encoder shape");
  if (encoder.max_len < 8) throw ConfigError("config: max_len must be at least 8");
}

nlohmann::json Config::to_json() const {
  json j = {
      {"k1", k1},
      {"k2", k2},
      {"memory_size", memory_size},
      {"lambda_r", lambda_r},
      {"lambda_q", lambda_q},
      {"lambda_p", lambda_p},
      {"lambda_m", lambda_m},
      {"q_low", q_low},
      {"q_high", q_high},
      {"t_low", t_low ? json(*t_low) : json(nullptr)},
      {"t_high", t_high ? json(*t_high) : json(nullptr)},
      {"learning_rate", learning_rate},
      {"batch_size", batch_size},
      {"epochs", epochs},
      {"patience", patience},
      {"pos_weight_cap", pos_weight_cap},
      {"val_fraction", val_fraction},
      {"seed", seed},
      {"rot_learning_rate", rot_learning_rate},
      {"rot_batch_size", rot_batch_size},
      {"rot_epochs", rot_epochs},
      {"rot_max_pairs", rot_max_pairs},
      {"rot_holdout_pairs", rot_holdout_pairs},
      {"rot_overlap_share", rot_overlap_share},
      {"record_all_key_sentences", record_all_key_sentences},
      {"rouge_guidance", rouge_guidance},
      {"memory_init", memory_init_name(memory_init)},
      {"memory_update", memory_update},
      {"use_memory", use_memory},
      {"weighted_pool", weighted_pool},
      {"arp_from_rot", arp_from_rot},
      {"dim", encoder.dim},
      {"heads", encoder.heads},
      {"arp_layers", encoder.arp_layers},
      {"max_len", encoder.max_len},
      {"vocab_size", encoder.vocab_size},
      {"ffn_mult", encoder.ffn_mult},
      {"pattern_in_feature", encoder.pattern_in_feature},
      {"bm25_k", bm25.k},
      {"bm25_b", bm25.b},
  };
  return j;
}

Config Config::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  Config c;
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config: unknown key \"" + key + "\"");
    it->second(c, value, key);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void Config::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << to_json().dump(2) << '\n';
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> k = {"full",          "no-rouge", "rand-mem-init", "no-mem-update",
                                             "no-pmb",        "avg-pool", "no-pattern-aggr"};
  return k;
}

Config apply_variant(Config config, const std::string& variant) {
  if (variant == "full") {
  } else if (variant == "no-rouge") {
    config.rouge_guidance = false;
  } else if (variant == "rand-mem-init") {
    config.memory_init = MemoryInit::kRandom;
  } else if (variant == "no-mem-update") {
    config.memory_update = false;
  } else if (variant == "no-pmb") {
    config.use_memory = false;
    config.lambda_q = 1.0;
    config.lambda_p = 0.0;
    config.encoder.pattern_in_feature = false;
  } else if (variant == "avg-pool") {
    config.weighted_pool = false;
  } else if (variant == "no-pattern-aggr") {
    config.encoder.pattern_in_feature = false;
  } else {
    throw ConfigError("unknown variant \"" + variant + "\"");
  }
  return config;
}

}  // namespace mtm
