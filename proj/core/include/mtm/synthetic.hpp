// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtm/corpus.hpp"

namespace mtm {

/// Generator knobs. Every relevant article quotes its claim in one sentence
/// and pairs the claim topic with a debunking phrase in another; the rest
/// of the article is filler. Irrelevant articles fact-check sibling events
/// that reuse some of a claim's words in different slots.
struct SyntheticConfig {
  std::size_t min_distractors = 8;
  std::size_t max_distractors = 30;
  std::size_t decoy_min_distractors = 2;
  std::size_t decoy_max_distractors = 8;
  /// Bounds on the fraction of claim tokens quoted verbatim (contiguously)
  /// by the quote sentence.
  double min_quote_fraction = 0.6;
  double max_quote_fraction = 0.75;
  /// Slots of a claim event replaced when deriving a sibling event.
  std::size_t sibling_changes = 2;
  /// Probability that a filler sentence mentions a word of its event, in
  /// relevant and decoy articles respectively.
  double topic_mention_rate = 0.05;
  double decoy_mention_rate = 1.0;
};

/// Where the two planted sentences sit inside a relevant article.
struct PlantedSentences {
  std::string claim_id;
  std::string article_id;
  std::size_t quote_index = 0;    // quotes the claim
  std::size_t pattern_index = 0;  // topic + debunking phrase
};

struct SyntheticCorpus {
  std::vector<Claim> claims;
  std::vector<Article> articles;
  std::vector<RelevanceLabel> labels;  // positives only
  std::vector<PlantedSentences> planted;
};

/// Pure function of its arguments. Requires n_articles >= n_claims; each
/// claim gets exactly one relevant article.
SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_claims, std::size_t n_articles,
                                          const SyntheticConfig& config = {});

/// The fixed pool of debunking / introduction phrases.
const std::vector<std::string>& pattern_phrases();

}  // namespace mtm
