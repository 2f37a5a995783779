// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtm/corpus.hpp"
#include "mtm/parameters.hpp"
#include "mtm/tensor.hpp"

namespace mtm {

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t arp_layers = 2;
  std::size_t max_len = 128;
  std::size_t vocab_size = 0;
  std::size_t ffn_mult = 4;
  /// Whether the relevance head sees [q', s', m] (true) or [q', s'].
  bool pattern_in_feature = true;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  std::size_t feature_dim() const { return (pattern_in_feature ? 3 : 2) * dim; }

  bool operator==(const EncoderConfig&) const = default;
};

/// Parameter layout:
///   embed.token (vocab, dim), embed.segment (2, dim), embed.position (max_len, dim)
///   rot.*            the single claim/sentence transformer block
///   arp.<i>.*        interaction blocks
///   rouge_head.*     2-layer perceptron on the [CLS] output, 2 outputs
///   predict_head.*   2-layer perceptron on the aggregated feature, 1 output
class EncoderModel {
 public:
  EncoderModel() = default;
  /// Random initialisation; position embeddings start at zero.
  static EncoderModel create(const EncoderConfig& config, std::uint64_t seed);
  /// Wraps loaded parameters after checking every expected tensor is present.
  static EncoderModel from_parameters(const EncoderConfig& config, ParameterStore params);

  const EncoderConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  /// Embeddings plus the ROT block: the set covered by the drift penalty.
  std::vector<std::string> rot_parameter_names() const;
  std::vector<std::string> rouge_head_names() const;
  /// Interaction blocks plus the relevance head: what the main loop trains.
  std::vector<std::string> arp_parameter_names() const;

 private:
  EncoderConfig config_;
  ParameterStore params_;
};

struct PairEncoding {
  Tensor z;  // (seq_len, dim); row 0 is [CLS]
  TokenSeq tokens;
};

/// Token + segment + position embeddings followed by one pre-norm transformer block.
PairEncoding encode_rot(const TokenSeq& pair, const EncoderConfig& config, const Binding& params);
PairEncoding encode_rot(const TokenSeq& pair, const EncoderModel& model);

/// arp_layers further blocks over a ROT encoding.
PairEncoding encode_arp(const PairEncoding& enc, const EncoderConfig& config, const Binding& params);
PairEncoding encode_arp(const PairEncoding& enc, const EncoderModel& model);

/// Predicted ROUGE-2 (precision, recall), each squashed into [0, 1].
Tensor rouge_head(const PairEncoding& enc, const Binding& params);
Tensor rouge_head(const PairEncoding& enc, const EncoderModel& model);

/// Relevance probability from an aggregated feature vector.
Tensor predict_head(const Tensor& feature, const Binding& params);

/// Sum over snapshot entries of ||theta - theta0||^2. ContractError without a snapshot.
Tensor drift_penalty(const ParameterStore& store, const Binding& params);

/// ||R_hat - R2||^2 + lambda_r * sum over snapshot entries of ||theta - theta0||^2.
Tensor rot_pretrain_loss(const Tensor& predicted, const Tensor& target, const ParameterStore& store,
                         const Binding& params, double lambda_r);

/// Mean of token-embedding rows (no positions, no attention).
std::vector<double> avg_token_embedding(const std::vector<std::int32_t>& ids, const EncoderModel& model);
std::vector<double> avg_token_embedding(std::string_view text, const Vocabulary& vocab,
                                        const EncoderModel& model);

/// Means over claim tokens (excluding [CLS] and the first [SEP]) and over
/// sentence tokens (excluding the final [SEP]).
std::pair<Tensor, Tensor> mean_pool(const PairEncoding& enc);

}  // namespace mtm
