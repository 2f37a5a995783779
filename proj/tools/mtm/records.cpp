// SPDX-License-Identifier: Apache-2.0
#include "records.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "mtm/error.hpp"

namespace mtm::cli {
namespace {

using nlohmann::json;

// NaN is not representable in JSON.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("claim_id") || !rec["claim_id"].is_string()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an object with \"claim_id\"");
    }
    f(rec, line_no);
  }
}

}  // namespace

std::string candidates_jsonl(const std::vector<CandidateSet>& sets) {
  std::string out;
  for (const auto& set : sets) {
    json entries = json::array();
    for (const auto& c : set.entries) entries.push_back({{"article_id", c.article_id}, {"score", c.score}});
    out += json{{"claim_id", set.claim_id}, {"candidates", entries}}.dump() + "\n";
  }
  return out;
}

std::vector<CandidateSet> load_candidates(const std::filesystem::path& path) {
  std::vector<CandidateSet> sets;
  for_each_line(path, [&](const json& rec, std::size_t line_no) {
    const auto it = rec.find("candidates");
    if (it == rec.end() || !it->is_array()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing \"candidates\" array");
    }
    CandidateSet set;
    set.claim_id = rec["claim_id"].get<std::string>();
    for (const auto& c : *it) set.entries.push_back({c.at("article_id").get<std::string>(), c.at("score").get<double>()});
    sets.push_back(std::move(set));
  });
  return sets;
}

json ranking_json(const RankedResult& result) {
  json ranking = json::array();
  for (const auto& p : result.ranking) {
    json keys = json::array();
    for (const auto& e : p.evidence) {
      keys.push_back({{"index", e.sentence_index},
                      {"scr", e.scr},
                      {"scr_Q", e.scr_q},
                      {"scr_P", e.scr_p},
                      {"weight", e.weight},
                      {"pattern", e.pattern ? json(*e.pattern) : json(nullptr)}});
    }
    ranking.push_back({{"article_id", p.article_id}, {"score", p.score}, {"key_sentences", keys}});
  }
  return {{"claim_id", result.claim_id}, {"ranking", ranking}};
}

std::string rankings_jsonl(const std::vector<RankedResult>& results) {
  std::string out;
  for (const auto& r : results) out += ranking_json(r).dump() + "\n";
  return out;
}

std::vector<RankingLine> load_ranking_ids(const std::filesystem::path& path) {
  std::vector<RankingLine> lines;
  for_each_line(path, [&](const json& rec, std::size_t line_no) {
    const char* key = rec.contains("ranking") ? "ranking" : "candidates";
    const auto it = rec.find(key);
    if (it == rec.end() || !it->is_array()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing \"ranking\" or \"candidates\"");
    }
    RankingLine line{rec["claim_id"].get<std::string>(), {}};
    for (const auto& e : *it) line.article_ids.push_back(e.at("article_id").get<std::string>());
    lines.push_back(std::move(line));
  });
  return lines;
}

EvalReport evaluate_rankings(const std::vector<RankingLine>& rankings, const std::vector<RelevanceLabel>& labels,
                             const std::vector<std::size_t>& ks, bool drop_unrecalled) {
  std::map<std::string, std::set<std::string>> positives;
  for (const auto& l : labels) {
    if (l.label == 1) positives[l.claim_id].insert(l.article_id);
  }
  EvalReport report;
  EvalInput input;
  for (const auto& r : rankings) {
    const auto pos = positives.find(r.claim_id);
    if (pos == positives.end()) continue;
    EvalQuery q{r.claim_id, r.article_ids, pos->second};
    bool recalled = false;
    for (const auto& id : q.ranking) recalled |= q.relevant.count(id) > 0;
    if (!recalled) {
      if (!drop_unrecalled) {
        throw ValidationError("claim \"" + r.claim_id + "\" has no relevant article in its ranking");
      }
      ++report.dropped;
      continue;
    }
    input.push_back(std::move(q));
  }
  if (input.empty()) throw ValidationError("no claim has a relevant article in its ranking");
  report.evaluated = input.size();
  report.metrics = json::object();
  for (const auto& [name, value] : evaluate(input, ks)) report.metrics[name] = value;
  return report;
}

json training_log_json(const TrainingLog& log) {
  json epochs = json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"mean_loss", e.mean_loss},
                      {"val_mrr", number_or_null(e.val_mrr)},
                      {"feedback", e.feedback},
                      {"right", e.right},
                      {"wrong", e.wrong},
                      {"patterns_moved", e.patterns_moved},
                      {"step_losses", e.step_losses}});
  }
  return {{"rot",
           {{"skipped", log.rot.skipped},
            {"train_pairs", log.rot.train_pairs},
            {"holdout_pairs", log.rot.holdout_pairs},
            {"steps", log.rot.steps},
            {"holdout_mse_before", log.rot.holdout_mse_before},
            {"holdout_mse_after", log.rot.holdout_mse_after},
            {"epoch_loss", log.rot.epoch_loss}}},
          {"t_low", log.t_low},
          {"t_high", log.t_high},
          {"residuals", log.residuals},
          {"valid_residuals", log.valid_residuals},
          {"training_pairs", log.training_pairs},
          {"positive_weight", log.positive_weight},
          {"epochs", epochs},
          {"best_epoch", log.best_epoch},
          {"best_val_mrr", number_or_null(log.best_val_mrr)},
          {"train_claims", log.train_claims},
          {"val_claims", log.val_claims}};
}

std::string memory_trace_jsonl(const std::vector<MemoryTraceEntry>& trace) {
  std::string out;
  for (const auto& t : trace) {
    out += json{{"epoch", t.epoch},
                {"claim_id", t.claim_id},
                {"article_id", t.article_id},
                {"sentence_index", t.sentence_index},
                {"pattern", t.pattern},
                {"weight", t.weight},
                {"right", t.right}}
               .dump() +
           "\n";
  }
  return out;
}

}  // namespace mtm::cli
