// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtm/config.hpp"
#include "mtm/corpus.hpp"
#include "mtm/encoder.hpp"
#include "mtm/memory.hpp"
#include "mtm/retrieval.hpp"

namespace mtm {

/// Everything needed to rerank: configuration, vocabulary, encoder weights
/// and (unless disabled) the pattern memory.
struct TrainedModel {
  Config config;
  Vocabulary vocab;
  EncoderModel encoder;
  std::optional<MemoryBank> bank;
};

/// Fresh model with randomly initialised weights and no memory bank.
TrainedModel initial_model(Config config, Vocabulary vocab);

/// One checkpoint file: encoder tensors, patterns as pattern_<i>, and the
/// configuration and vocabulary in the metadata block.
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

/// Claim tokens and average token embedding.
struct PreparedClaim {
  std::string id;
  std::vector<std::string> tokens;
  Vec embedding;
};

/// Sentences with at least one token, with their tokens and embeddings.
struct PreparedArticle {
  std::string id;
  std::vector<std::size_t> sentence_index;
  std::vector<std::vector<std::string>> tokens;
  std::vector<Vec> embeddings;

  std::size_t size() const { return sentence_index.size(); }
};

/// ContractError when the claim has no tokens.
PreparedClaim prepare_claim(const Claim& claim, const Vocabulary& vocab, const EncoderModel& encoder);
PreparedArticle prepare_article(const Article& article, const Vocabulary& vocab, const EncoderModel& encoder);

/// 1 - (x - min) / (max - min); all ones when every value is equal.
std::vector<double> scale_scores(const std::vector<double>& values);

struct ScoredSentence {
  std::size_t sentence_index = 0;  // index within the article
  std::size_t position = 0;        // index within PreparedArticle
  double scr_q = 0.0;
  double scr_p = 0.0;
  double scr = 0.0;
  std::optional<std::size_t> pattern;  // nearest pattern to s - q
  Vec residual;
};

/// Combines claim-sentence proximity with pattern proximity. bank may be
/// null, in which case scr_p is 0.
std::vector<ScoredSentence> score_sentences(const PreparedClaim& claim, const PreparedArticle& article,
                                            const MemoryBank* bank, double lambda_q, double lambda_p);

struct KeySentences {
  std::vector<ScoredSentence> sentences;  // by descending scr, ties by sentence index
  std::vector<double> weights;            // scr normalised to sum 1 (uniform when all zero)
};

KeySentences select_key_sentences(std::vector<ScoredSentence> scored, std::size_t k2);

/// [q', s', m] or [q', s'] when pattern is null.
Tensor build_feature(const Tensor& q_pooled, const Tensor& s_pooled, const Vec* pattern);

struct KeyEvidence {
  std::size_t sentence_index = 0;
  double scr = 0.0;
  double scr_q = 0.0;
  double scr_p = 0.0;
  double weight = 0.0;
  std::optional<std::size_t> pattern;
};

struct Prediction {
  std::string claim_id;
  std::string article_id;
  double score = 0.0;  // relevance probability
  std::vector<KeyEvidence> evidence;
};

struct ArticleForward {
  Prediction prediction;
  Tensor y_hat;  // scalar; undefined when the article has no scorable sentence
  KeySentences keys;
};

/// Key-sentence selection, ROT + ARP encoding per key sentence, weighted
/// aggregation and the relevance head. Gradients flow into whatever the
/// binding marks trainable.
ArticleForward forward_article(const PreparedClaim& claim, const PreparedArticle& article,
                               const TrainedModel& model, const Binding& params);

Prediction predict_article(const Claim& claim, const Article& article, const TrainedModel& model);

/// Positive-weighted binary cross-entropy.
Tensor matching_loss(const Tensor& y_hat, int label, double positive_weight);

struct RankedResult {
  std::string claim_id;
  std::vector<Prediction> ranking;  // descending score, ties by ascending article id
};

using ArticleLookup = std::unordered_map<std::string, const Article*>;
ArticleLookup make_article_lookup(const std::vector<Article>& articles);

/// Scores every candidate and sorts. LookupError for unknown article ids.
RankedResult rerank(const Claim& claim, const CandidateSet& candidates, const ArticleLookup& articles,
                    const TrainedModel& model);

struct TrainingPair {
  std::size_t claim = 0;  // index into the claim list
  std::string article_id;
  int label = 0;
  /// 1-based BM25 rank; empty for a positive appended after the candidates.
  std::optional<std::size_t> stage1_rank;
};

/// The top-k1 candidates per claim plus any labelled positive that BM25
/// missed. candidates[i] belongs to claims[i]. A claim with neither is
/// dropped with a warning.
std::vector<TrainingPair> make_training_pairs(const std::vector<Claim>& claims,
                                              const std::vector<CandidateSet>& candidates,
                                              const std::vector<RelevanceLabel>& labels);

}  // namespace mtm
