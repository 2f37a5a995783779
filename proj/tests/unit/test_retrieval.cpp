// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mtm/error.hpp"
#include "mtm/retrieval.hpp"
#include "test_util.hpp"

namespace mtm {
namespace {

Article article(const std::string& id, const std::string& text) { return {id, "src", {{0, text}}}; }

std::vector<Article> random_corpus(std::size_t n, std::uint64_t seed, std::size_t vocab = 12) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, 15), word(0, vocab - 1);
  std::vector<Article> out;
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    const std::size_t l = len(rng);
    for (std::size_t i = 0; i < l; ++i) text += "w" + std::to_string(word(rng)) + " ";
    char id[16];
    std::snprintf(id, sizeof id, "d%03zu", d);
    out.push_back(article(id, text));
  }
  return out;
}

// Scores straight from token lists, independent of the index.
double direct_bm25(const std::vector<std::string>& query, std::size_t doc,
                   const std::vector<std::vector<std::string>>& docs, double k, double b) {
  double avg = 0.0;
  for (const auto& d : docs) avg += static_cast<double>(d.size());
  avg /= static_cast<double>(docs.size());
  double score = 0.0;
  for (const auto& t : query) {
    double df = 0.0;
    for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end() ? 1.0 : 0.0;
    const double tf = static_cast<double>(std::count(docs[doc].begin(), docs[doc].end(), t));
    if (tf == 0.0) continue;
    const double n = static_cast<double>(docs.size());
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    const double len = static_cast<double>(docs[doc].size());
    score += idf * tf * (k + 1.0) / (tf + k * (1.0 - b + b * len / avg));
  }
  return score;
}

TEST(InvertedIndex, SingleArticle) {
  const auto index = InvertedIndex::build({article("d", "a a b")});
  ASSERT_EQ(index.postings("a").size(), 1u);
  EXPECT_EQ(index.postings("a")[0], (Posting{0, 2}));
  EXPECT_EQ(index.postings("b")[0], (Posting{0, 1}));
  EXPECT_EQ(index.doc_lens()[0], 3u);
  EXPECT_TRUE(index.postings("zzz").empty());
}

TEST(InvertedIndex, IdenticalArticles) {
  const auto index = InvertedIndex::build({article("x", "p q r"), article("y", "p q r")});
  EXPECT_EQ(index.doc_lens()[0], index.doc_lens()[1]);
  EXPECT_DOUBLE_EQ(index.avg_doc_len(), 3.0);
}

TEST(InvertedIndex, EmptyCorpusIsRejected) { EXPECT_THROW(InvertedIndex::build({}), ValidationError); }

TEST(InvertedIndex, PostingsMatchRecount) {
  const auto corpus = random_corpus(20, 3);
  const auto index = InvertedIndex::build(corpus);
  std::map<std::string, std::map<std::uint32_t, std::uint32_t>> recount;
  for (std::uint32_t d = 0; d < corpus.size(); ++d)
    for (const auto& t : tokenize(corpus[d].full_text())) ++recount[t][d];
  EXPECT_EQ(index.term_count(), recount.size());
  for (const auto& [term, per_doc] : recount) {
    const auto& postings = index.postings(term);
    ASSERT_EQ(postings.size(), per_doc.size()) << term;
    for (const auto& p : postings) EXPECT_EQ(p.tf, per_doc.at(p.doc)) << term;
  }
}

TEST(InvertedIndex, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const auto index = InvertedIndex::build(random_corpus(20, 5));
  index.save(dir / "index.bin");
  EXPECT_EQ(InvertedIndex::load(dir / "index.bin"), index);
}

TEST(InvertedIndex, CorruptFileIsParseError) {
  testing::TempDir dir;
  testing::write_file(dir / "index.bin", "not an index");
  EXPECT_THROW(InvertedIndex::load(dir / "index.bin"), ParseError);
}

TEST(Bm25, NoIndexedTermScoresZero) {
  const auto index = InvertedIndex::build({article("d", "a b")});
  EXPECT_EQ(bm25_score({"zz"}, "d", index), 0.0);
}

// N=1, df=1, tf=1 and len=avg: idf = ln(0.5/1.5 + 1) = ln(4/3), and each
// term contributes idf * (k+1)/(1+k) = idf.
TEST(Bm25, SingleDocClosedForm) {
  const auto index = InvertedIndex::build({article("d", "a b")});
  EXPECT_NEAR(bm25_score({"a", "b"}, "d", index), 2.0 * std::log(4.0 / 3.0), 1e-12);
}

TEST(Bm25, UnknownArticleIsLookupError) {
  const auto index = InvertedIndex::build({article("d", "a b")});
  EXPECT_THROW(bm25_score({"a"}, "nope", index), LookupError);
}

TEST(Bm25, MatchesDirectFormula) {
  const auto corpus = random_corpus(20, 11);
  const auto index = InvertedIndex::build(corpus);
  std::vector<std::vector<std::string>> docs;
  for (const auto& a : corpus) docs.push_back(tokenize(a.full_text()));
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> len(1, 6), word(0, 14);
  for (int q = 0; q < 50; ++q) {
    std::vector<std::string> query;
    const std::size_t l = len(rng);
    for (std::size_t i = 0; i < l; ++i) query.push_back("w" + std::to_string(word(rng)));
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const double expected = direct_bm25(query, d, docs, 1.2, 0.75);
      const double got = bm25_score(query, corpus[d].id, index);
      EXPECT_NEAR(got, expected, 1e-9 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(Bm25, TermFrequencyMonotone) {
  for (int extra = 0; extra < 5; ++extra) {
    std::string text = "a b c";
    const auto before = InvertedIndex::build({article("x", text), article("y", "b c d"), article("z", "e f")});
    for (int i = 0; i <= extra; ++i) text += " a";
    const auto after = InvertedIndex::build({article("x", text), article("y", "b c d"), article("z", "e f")});
    EXPECT_GE(bm25_score({"a"}, "x", after), bm25_score({"a"}, "x", before));
  }
}

TEST(Retrieve, AtMostCorpusSize) {
  const auto index = InvertedIndex::build({article("a", "x y"), article("b", "x z"), article("c", "x w")});
  EXPECT_LE(retrieve_candidates({"c", "x"}, index, 50).entries.size(), 3u);
}

TEST(Retrieve, SharedTokenRanksFirst) {
  const auto index = InvertedIndex::build({article("a", "x y"), article("b", "p q"), article("c", "r s")});
  const auto set = retrieve_candidates({"c", "q"}, index, 50);
  ASSERT_FALSE(set.entries.empty());
  EXPECT_EQ(set.entries[0].article_id, "b");
  EXPECT_EQ(set.entries.size(), 1u);
}

TEST(Retrieve, MatchesBruteForceSort) {
  const auto corpus = random_corpus(100, 23, 30);
  const auto index = InvertedIndex::build(corpus);
  const Claim claim{"c", "w1 w2 w3 w5 w8 w13"};
  std::vector<Candidate> all;
  for (const auto& a : corpus) {
    const double s = bm25_score(tokenize(claim.text), a.id, index);
    if (s > 0.0) all.push_back({a.id, s});
  }
  std::sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) {
    return x.score != y.score ? x.score > y.score : x.article_id < y.article_id;
  });
  for (std::size_t k1 : {1u, 10u, 50u, 200u}) {
    const auto set = retrieve_candidates(claim, index, k1);
    const std::size_t n = std::min(k1, all.size());
    ASSERT_EQ(set.entries.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(set.entries[i].article_id, all[i].article_id);
      EXPECT_DOUBLE_EQ(set.entries[i].score, all[i].score);
    }
  }
}

TEST(Retrieve, TiesBrokenByArticleId) {
  const auto index = InvertedIndex::build({article("b", "x y"), article("a", "x y"), article("c", "x y")});
  const auto set = retrieve_candidates({"c", "x"}, index, 3);
  ASSERT_EQ(set.entries.size(), 3u);
  EXPECT_EQ(set.entries[0].article_id, "a");
  EXPECT_EQ(set.entries[1].article_id, "b");
  EXPECT_EQ(set.entries[2].article_id, "c");
}

TEST(Retrieve, Deterministic) {
  const auto index = InvertedIndex::build(random_corpus(50, 9));
  const auto a = retrieve_candidates({"c", "w1 w4"}, index, 10);
  const auto b = retrieve_candidates({"c", "w1 w4"}, index, 10);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].article_id, b.entries[i].article_id);
    EXPECT_EQ(a.entries[i].score, b.entries[i].score);
  }
}

}  // namespace
}  // namespace mtm
