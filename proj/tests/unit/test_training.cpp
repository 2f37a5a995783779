// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "mtm/error.hpp"
#include "mtm/synthetic.hpp"
#include "mtm/training.hpp"
#include "test_util.hpp"

namespace mtm {
namespace {

Config tiny_config() {
  Config c;
  c.encoder.dim = 8;
  c.encoder.heads = 2;
  c.encoder.arp_layers = 1;
  c.encoder.max_len = 48;
  c.encoder.ffn_mult = 2;
  c.memory_size = 2;
  c.k1 = 4;
  c.k2 = 2;
  c.epochs = 1;
  c.batch_size = 8;
  c.rot_epochs = 1;
  c.rot_max_pairs = 200;
  c.rot_holdout_pairs = 40;
  c.val_fraction = 0.25;
  c.q_low = 0.1;
  c.q_high = 0.9;
  return c;
}

struct Corpus {
  SyntheticCorpus s = generate_synthetic_corpus(2, 12, 30);
  InvertedIndex index = InvertedIndex::build(s.articles);
  Vocabulary vocab;
  Corpus() {
    std::vector<std::string> texts;
    for (const auto& c : s.claims) texts.push_back(c.text);
    for (const auto& a : s.articles) texts.push_back(a.full_text());
    vocab = Vocabulary::build(texts);
  }
  TrainingData data() const { return {s.claims, s.articles, s.labels, index}; }
};

TEST(SplitClaims, DisjointCoveringAndDeterministic) {
  const auto [train, val] = split_claims(100, 0.15, 3);
  EXPECT_EQ(val.size(), 15u);
  std::set<std::size_t> all(train.begin(), train.end());
  for (auto v : val) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(split_claims(100, 0.15, 3), split_claims(100, 0.15, 3));
  EXPECT_TRUE(split_claims(10, 0.0, 3).second.empty());
  EXPECT_EQ(split_claims(3, 0.01, 1).second.size(), 1u);
}

TEST(CollectRougePairs, TargetsAreExactAndBudgetHolds) {
  Corpus c;
  const auto data = c.data();
  const std::vector<std::size_t> claims{0, 1, 2};
  const auto all = collect_rouge_pairs(data, claims, 4, 1u << 30, 0.5, 1);
  ASSERT_FALSE(all.empty());
  for (const auto& p : all) {
    const Article* a = nullptr;
    for (const auto& x : c.s.articles) if (x.id == p.article_id) a = &x;
    ASSERT_NE(a, nullptr);
    const auto want = rouge2(tokenize(c.s.claims[p.claim].text), tokenize(a->sentences[p.sentence].text));
    EXPECT_EQ(p.target.precision, want.precision);
    EXPECT_EQ(p.target.recall, want.recall);
  }
  const auto some = collect_rouge_pairs(data, claims, 4, 20, 0.5, 1);
  EXPECT_EQ(some.size(), 20u);
  std::size_t overlap = 0;
  for (const auto& p : some) overlap += p.target.recall > 0.0 || p.target.precision > 0.0;
  EXPECT_GE(overlap, 1u);
}

TEST(Train, ZeroEpochsGivesPretrainedModelWithBank) {
  Corpus c;
  auto cfg = tiny_config();
  cfg.epochs = 0;
  const auto initial = initial_model(cfg, c.vocab);
  const auto r = train(c.data(), cfg, c.vocab);
  EXPECT_TRUE(r.log.epochs.empty());
  ASSERT_TRUE(r.model.bank.has_value());
  EXPECT_EQ(r.model.bank->size(), 2u);
  EXPECT_NE(r.model.encoder.params().at("rot.qkv.weight").value,
            initial.encoder.params().at("rot.qkv.weight").value);
  EXPECT_EQ(r.model.encoder.params().at("predict_head.fc1.weight").value,
            initial.encoder.params().at("predict_head.fc1.weight").value);
  EXPECT_LT(r.log.rot.holdout_mse_after, r.log.rot.holdout_mse_before);
}

TEST(Train, OneEpochFreezesRotAndIsDeterministic) {
  Corpus c;
  const auto cfg = tiny_config();
  const auto a = train(c.data(), cfg, c.vocab);
  const auto b = train(c.data(), cfg, c.vocab);
  ASSERT_EQ(a.log.epochs.size(), 1u);
  EXPECT_TRUE(a.model.encoder.params() == b.model.encoder.params());
  EXPECT_EQ(a.model.bank->patterns, b.model.bank->patterns);
  EXPECT_EQ(a.model.bank->epoch, 1u);
  EXPECT_GT(a.log.epochs[0].feedback, 0u);
  EXPECT_EQ(a.log.epochs[0].right + a.log.epochs[0].wrong, a.log.epochs[0].feedback);

  auto frozen = tiny_config();
  frozen.epochs = 0;
  const auto pre = train(c.data(), frozen, c.vocab);
  for (const auto& name : pre.model.encoder.rot_parameter_names()) {
    EXPECT_EQ(a.model.encoder.params().at(name).value, pre.model.encoder.params().at(name).value) << name;
  }

  testing::TempDir dir;
  save_model(dir / "a.ckpt", a.model);
  save_model(dir / "b.ckpt", b.model);
  EXPECT_EQ(testing::read_file(dir / "a.ckpt"), testing::read_file(dir / "b.ckpt"));
}

TEST(Train, TooFewValidResidualsIsConfigError) {
  Corpus c;
  auto cfg = tiny_config();
  cfg.memory_size = 500;
  cfg.epochs = 0;
  EXPECT_THROW(train(c.data(), cfg, c.vocab), ConfigError);
}

TEST(Train, EveryVariantRuns) {
  Corpus c;
  for (const auto& v : variant_names()) {
    const auto cfg = apply_variant(tiny_config(), v);
    const auto r = train(c.data(), cfg, c.vocab);
    EXPECT_EQ(r.log.epochs.size(), 1u) << v;
    EXPECT_EQ(r.model.bank.has_value(), cfg.use_memory) << v;
  }
}

TEST(Train, PretrainedModelSkipsRotPretraining) {
  Corpus c;
  auto cfg = tiny_config();
  cfg.epochs = 0;
  const auto pre = train(c.data(), cfg, c.vocab);
  const auto again = train(c.data(), cfg, c.vocab, &pre.model);
  EXPECT_TRUE(again.log.rot.skipped);
  EXPECT_EQ(again.model.encoder.params().at("rot.qkv.weight").value,
            pre.model.encoder.params().at("rot.qkv.weight").value);
}

TEST(ValidationMrr, InUnitInterval) {
  Corpus c;
  auto cfg = tiny_config();
  cfg.epochs = 0;
  const auto r = train(c.data(), cfg, c.vocab);
  const double v = validation_mrr(r.model, c.data(), {0, 1, 2, 3});
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, 1.0);
}

}  // namespace
}  // namespace mtm
