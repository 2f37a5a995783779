// SPDX-License-Identifier: Apache-2.0
#include "mtm/metrics.hpp"

#include "mtm/error.hpp"

namespace mtm {
namespace {

void check_k(std::size_t k) {
  if (k < 1) throw ContractError("metric cutoff k must be at least 1");
}

}  // namespace

void validate_eval_input(const EvalInput& inputs) {
  if (inputs.empty()) throw ValidationError("evaluation needs at least one query");
  for (const auto& q : inputs) first_relevant_rank(q);
}

std::size_t first_relevant_rank(const EvalQuery& query) {
  for (std::size_t i = 0; i < query.ranking.size(); ++i) {
    if (query.relevant.count(query.ranking[i])) return i + 1;
  }
  throw ValidationError("claim \"" + query.claim_id + "\" has no relevant article in its candidate list");
}

double mrr(const EvalInput& inputs) {
  validate_eval_input(inputs);
  double total = 0.0;
  for (const auto& q : inputs) total += 1.0 / static_cast<double>(first_relevant_rank(q));
  return total / static_cast<double>(inputs.size());
}

double map_at_k(const EvalInput& inputs, std::size_t k) {
  check_k(k);
  validate_eval_input(inputs);
  double total = 0.0;
  for (const auto& q : inputs) {
    double hits = 0.0, ap = 0.0;
    for (std::size_t j = 0; j < std::min(k, q.ranking.size()); ++j) {
      if (!q.relevant.count(q.ranking[j])) continue;
      hits += 1.0;
      ap += hits / static_cast<double>(j + 1);
    }
    total += ap / static_cast<double>(q.relevant.size());
  }
  return total / static_cast<double>(inputs.size());
}

double hit_at_k(const EvalInput& inputs, std::size_t k) {
  check_k(k);
  validate_eval_input(inputs);
  double hits = 0.0;
  for (const auto& q : inputs) {
    if (first_relevant_rank(q) <= k) hits += 1.0;
  }
  return hits / static_cast<double>(inputs.size());
}

std::map<std::string, double> evaluate(const EvalInput& inputs, const std::vector<std::size_t>& ks) {
  std::map<std::string, double> report{{"MRR", mrr(inputs)}};
  for (auto k : ks) {
    report["MAP@" + std::to_string(k)] = map_at_k(inputs, k);
    report["HIT@" + std::to_string(k)] = hit_at_k(inputs, k);
  }
  return report;
}

}  // namespace mtm
