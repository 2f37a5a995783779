// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtm/metrics.hpp"
#include "mtm/ranker.hpp"
#include "mtm/retrieval.hpp"
#include "mtm/training.hpp"

namespace mtm::cli {

// One JSON object per line, in claim order.
//   candidates: {"claim_id", "candidates": [{"article_id", "score"}...]}
//   rankings:   {"claim_id", "ranking": [{"article_id", "score", "key_sentences": [...]}...]}

std::string candidates_jsonl(const std::vector<CandidateSet>& sets);
std::vector<CandidateSet> load_candidates(const std::filesystem::path& path);

nlohmann::json ranking_json(const RankedResult& result);
std::string rankings_jsonl(const std::vector<RankedResult>& results);

/// Ranked article ids per claim from either file kind.
struct RankingLine {
  std::string claim_id;
  std::vector<std::string> article_ids;
};
std::vector<RankingLine> load_ranking_ids(const std::filesystem::path& path);

struct EvalReport {
  nlohmann::json metrics;
  std::size_t evaluated = 0;
  std::size_t dropped = 0;  // no relevant id in the ranking
};

/// Scores the rankings against the positive labels. Claims without a
/// labelled positive are skipped; claims whose ranking misses every positive
/// are dropped when drop_unrecalled is set and a ValidationError otherwise.
EvalReport evaluate_rankings(const std::vector<RankingLine>& rankings, const std::vector<RelevanceLabel>& labels,
                             const std::vector<std::size_t>& ks, bool drop_unrecalled);

nlohmann::json training_log_json(const TrainingLog& log);
std::string memory_trace_jsonl(const std::vector<MemoryTraceEntry>& trace);

}  // namespace mtm::cli
