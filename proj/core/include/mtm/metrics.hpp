// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mtm {

/// One query's ranked article ids and the ids judged relevant.
struct EvalQuery {
  std::string claim_id;
  std::vector<std::string> ranking;
  std::set<std::string> relevant;
};

using EvalInput = std::vector<EvalQuery>;

/// Every query must have at least one relevant id inside its ranking;
/// ValidationError otherwise.
void validate_eval_input(const EvalInput& inputs);

/// 1-based position of the first relevant id.
std::size_t first_relevant_rank(const EvalQuery& query);

double mrr(const EvalInput& inputs);
/// Average of precision-at-j over relevant positions j <= k, normalised by
/// the number of relevant ids for the query (not by min(n, k)).
double map_at_k(const EvalInput& inputs, std::size_t k);
double hit_at_k(const EvalInput& inputs, std::size_t k);

/// {"MRR", "MAP@k"..., "HIT@k"...} for the requested cutoffs.
std::map<std::string, double> evaluate(const EvalInput& inputs, const std::vector<std::size_t>& ks);

}  // namespace mtm
