// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "mtm/error.hpp"
#include "mtm/metrics.hpp"

namespace mtm {
namespace {

EvalQuery query(std::vector<std::string> ranking, std::set<std::string> relevant) {
  return {"c", std::move(ranking), std::move(relevant)};
}

TEST(Mrr, Examples) {
  EXPECT_DOUBLE_EQ(mrr({query({"a", "b"}, {"a"})}), 1.0);
  EXPECT_DOUBLE_EQ(mrr({query({"a", "b", "c"}, {"c"}), query({"x", "y"}, {"y"})}), (1.0 / 3 + 0.5) / 2);
}

TEST(MapAtK, NormalisedByRelevantCount) {
  // Relevant at ranks 1 and 3: (1/1 + 2/3) / 2.
  EXPECT_DOUBLE_EQ(map_at_k({query({"a", "b", "c"}, {"a", "c"})}, 3), 5.0 / 6.0);
  // Second relevant id outside the cutoff still counts in the denominator.
  EXPECT_DOUBLE_EQ(map_at_k({query({"a", "b", "c", "d"}, {"a", "d"})}, 3), 0.5);
}

TEST(HitAtK, Examples) {
  EXPECT_DOUBLE_EQ(hit_at_k({query({"a", "b"}, {"a"}), query({"a", "b", "c", "d"}, {"d"})}, 3), 0.5);
  EXPECT_DOUBLE_EQ(hit_at_k({query({"a"}, {"a"})}, 1), 1.0);
}

TEST(Metrics, InvalidInputs) {
  EXPECT_THROW(mrr({}), ValidationError);
  EXPECT_THROW(mrr({query({"a"}, {"b"})}), ValidationError);
  EXPECT_THROW(hit_at_k({query({"a"}, {"a"})}, 0), ContractError);
}

TEST(Metrics, PerfectRankingScoresOne) {
  const EvalInput in{query({"a", "b", "c"}, {"a", "b"}), query({"x", "y"}, {"x"})};
  const auto r = evaluate(in, {1, 2, 3});
  EXPECT_DOUBLE_EQ(r.at("MRR"), 1.0);
  EXPECT_DOUBLE_EQ(r.at("MAP@2"), 1.0);
  EXPECT_DOUBLE_EQ(r.at("HIT@1"), 1.0);
}

TEST(Metrics, BoundedAndMonotoneInK) {
  std::mt19937_64 rng(1);
  EvalInput in;
  for (int q = 0; q < 50; ++q) {
    std::vector<std::string> ranking;
    for (int i = 0; i < 10; ++i) ranking.push_back("d" + std::to_string(i));
    std::shuffle(ranking.begin(), ranking.end(), rng);
    in.push_back(query(ranking, {"d0", "d1"}));
  }
  double prev_hit = 0.0, prev_map = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double h = hit_at_k(in, k), m = map_at_k(in, k);
    EXPECT_GE(h, prev_hit);
    EXPECT_GE(m, prev_map);
    EXPECT_LE(h, 1.0);
    EXPECT_LE(m, 1.0);
    prev_hit = h;
    prev_map = m;
  }
  EXPECT_LE(mrr(in), 1.0);
  EXPECT_GT(mrr(in), 0.0);
}

}  // namespace
}  // namespace mtm
