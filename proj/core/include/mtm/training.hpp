// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mtm/config.hpp"
#include "mtm/corpus.hpp"
#include "mtm/ranker.hpp"
#include "mtm/retrieval.hpp"
#include "mtm/rouge.hpp"

namespace mtm {

struct TrainingData {
  const std::vector<Claim>& claims;
  const std::vector<Article>& articles;
  const std::vector<RelevanceLabel>& labels;
  const InvertedIndex& index;
};

/// Deterministic split of claim indices into (train, validation).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_claims(std::size_t n_claims,
                                                                           double val_fraction,
                                                                           std::uint64_t seed);

struct RougePair {
  std::size_t claim = 0;  // index into TrainingData::claims
  std::string article_id;
  std::size_t sentence = 0;  // position in the article's sentence list
  RougeTarget target;
};

struct RotPretrainLog {
  std::size_t train_pairs = 0;
  std::size_t holdout_pairs = 0;
  std::size_t steps = 0;
  double holdout_mse_before = 0.0;  // mean squared error per pair (sum over both outputs)
  double holdout_mse_after = 0.0;
  std::vector<double> epoch_loss;
  bool skipped = false;
};

/// Mean ||R_hat - R2||^2 of the ROUGE head over the pairs.
double rouge_head_mse(const TrainedModel& model, const TrainingData& data, const std::vector<RougePair>& pairs);

/// Collects (claim, sentence) pairs with their ROUGE-2 targets from every
/// sentence of the given claims' candidate and positive articles. Above
/// max_pairs, pairs with nonzero targets fill up to overlap_share of the
/// sample and zero-target pairs the rest.
std::vector<RougePair> collect_rouge_pairs(const TrainingData& data, const std::vector<std::size_t>& claim_indices,
                                           std::size_t k1, std::size_t max_pairs, double overlap_share,
                                           std::uint64_t seed);

/// Trains embeddings, the ROT block and the ROUGE head in place.
RotPretrainLog pretrain_rot(TrainedModel& model, const TrainingData& data, const std::vector<RougePair>& train,
                            const std::vector<RougePair>& holdout);

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double val_mrr = std::numeric_limits<double>::quiet_NaN();
  std::size_t feedback = 0;
  std::size_t right = 0;
  std::size_t wrong = 0;
  std::size_t patterns_moved = 0;
  double seconds = 0.0;
  /// Mean matching loss of each optimizer step.
  std::vector<double> step_losses;
};

struct MemoryTraceEntry {
  std::size_t epoch = 0;
  std::string claim_id;
  std::string article_id;
  std::size_t sentence_index = 0;
  std::size_t pattern = 0;
  double weight = 0.0;
  bool right = false;
};

struct TrainingLog {
  RotPretrainLog rot;
  double t_low = 0.0;
  double t_high = 0.0;
  std::size_t residuals = 0;
  std::size_t valid_residuals = 0;
  std::size_t training_pairs = 0;
  double positive_weight = 1.0;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;  // 0 when no epoch improved on the initial state
  double best_val_mrr = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> train_claims;
  std::vector<std::string> val_claims;
  /// Ledger entries recorded in each epoch, before the memory update.
  std::vector<MemoryTraceEntry> trace;
};

struct TrainResult {
  TrainedModel model;
  TrainingLog log;
};

/// Full pipeline: ROT pretraining (unless disabled or a pretrained model is
/// given), memory initialisation, then epochs of relevance training with
/// memory updates and validation-MRR early stopping. The best validation
/// state is returned.
TrainResult train(const TrainingData& data, const Config& config, const Vocabulary& vocab,
                  const TrainedModel* pretrained = nullptr);

/// Reranked MRR over claims whose candidate list holds a relevant article.
double validation_mrr(const TrainedModel& model, const TrainingData& data,
                      const std::vector<std::size_t>& claim_indices);

}  // namespace mtm
