// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "mtm/rouge.hpp"

namespace mtm {
namespace {

using Tokens = std::vector<std::string>;

TEST(BigramMultiset, Examples) {
  EXPECT_EQ(bigram_multiset({"a", "b", "c"}), (BigramCounts{{{"a", "b"}, 1}, {{"b", "c"}, 1}}));
  EXPECT_TRUE(bigram_multiset({"a"}).empty());
  EXPECT_TRUE(bigram_multiset({}).empty());
  EXPECT_EQ(bigram_multiset({"a", "a", "a"}), (BigramCounts{{{"a", "a"}, 2}}));
}

TEST(Rouge2, IdenticalSequences) {
  const auto r = rouge2({"x", "y", "z"}, {"x", "y", "z"});
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
}

TEST(Rouge2, DisjointVocabularies) {
  const auto r = rouge2({"a", "b"}, {"c", "d"});
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
}

TEST(Rouge2, HandEnumeration) {
  const auto r = rouge2({"a", "b", "c", "d"}, {"a", "b", "c", "e"});
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
}

TEST(Rouge2, ShortSideIsZero) {
  const auto r = rouge2({"a"}, {"a", "b"});
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(rouge2({}, {}).recall, 0.0);
}

TEST(Rouge2, OverlapIsClipped) {
  const auto r = rouge2({"a", "a", "a"}, {"a", "a"});
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
}

// Pairs each candidate bigram with an unused reference bigram.
std::size_t brute_overlap(const Tokens& q, const Tokens& s) {
  if (q.size() < 2 || s.size() < 2) return 0;
  std::vector<bool> used(q.size() - 1, false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
      if (!used[j] && q[j] == s[i] && q[j + 1] == s[i + 1]) {
        used[j] = true;
        ++matches;
        break;
      }
    }
  }
  return matches;
}

Tokens random_tokens(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(0, 12), word(0, 3);
  Tokens t(len(rng));
  for (auto& w : t) w = std::string(1, static_cast<char>('a' + word(rng)));
  return t;
}

TEST(Rouge2, MatchesBruteForceCounter) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tokens q = random_tokens(rng), s = random_tokens(rng);
    const std::size_t overlap = brute_overlap(q, s);
    const auto r = rouge2(q, s);
    const double want_recall = q.size() < 2 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(q.size() - 1);
    const double want_precision =
        s.size() < 2 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(s.size() - 1);
    ASSERT_EQ(r.recall, want_recall);
    ASSERT_EQ(r.precision, want_precision);
    ASSERT_EQ(bigram_overlap(bigram_multiset(q), bigram_multiset(s)), overlap);
  }
}

TEST(Rouge2, SwapSymmetryAndBounds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tokens q = random_tokens(rng), s = random_tokens(rng);
    const auto a = rouge2(q, s), b = rouge2(s, q);
    EXPECT_EQ(a.precision, b.recall);
    EXPECT_EQ(a.recall, b.precision);
    EXPECT_GE(a.precision, 0.0);
    EXPECT_LE(a.precision, 1.0);
    EXPECT_GE(a.recall, 0.0);
    EXPECT_LE(a.recall, 1.0);
  }
}

}  // namespace
}  // namespace mtm
