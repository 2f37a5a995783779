// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "mtm/config.hpp"
#include "mtm/error.hpp"
#include "test_util.hpp"

namespace mtm {
namespace {

Config valid() {
  Config c;
  c.encoder.vocab_size = 100;
  return c;
}

TEST(Config, DefaultsAreValid) { EXPECT_NO_THROW(valid().validate()); }

TEST(Config, LambdaSumMustBeOne) {
  auto c = valid();
  c.lambda_q = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.lambda_p = 0.5;
  EXPECT_NO_THROW(c.validate());
  c.lambda_q = 1.2;
  c.lambda_p = -0.2;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ThresholdPairs) {
  auto c = valid();
  c.t_low = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);
  c.t_high = 0.2;
  EXPECT_THROW(c.validate(), ConfigError);
  c.t_low = 0.252;
  c.t_high = 0.295;
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTrip) {
  auto c = valid();
  c.k1 = 20;
  c.t_low = 0.1;
  c.t_high = 0.4;
  c.memory_init = MemoryInit::kRandom;
  c.encoder.dim = 32;
  const auto back = Config::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.k1, 20u);
  EXPECT_EQ(back.encoder.dim, 32u);
}

TEST(Config, UnknownKeyIsRejected) {
  EXPECT_THROW(Config::from_json({{"k_one", 3}}), ConfigError);
  EXPECT_THROW(Config::from_json({{"k1", "three"}}), ConfigError);
  EXPECT_THROW(Config::from_json(nlohmann::json::array()), ConfigError);
}

TEST(Config, PartialJsonKeepsDefaults) {
  const auto c = Config::from_json({{"k2", 5}});
  EXPECT_EQ(c.k2, 5u);
  EXPECT_EQ(c.k1, Config{}.k1);
}

TEST(Config, SaveAndLoad) {
  testing::TempDir dir;
  auto c = valid();
  c.seed = 99;
  c.save(dir / "cfg.json");
  EXPECT_EQ(Config::load(dir / "cfg.json").seed, 99u);
  testing::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(Config::load(dir / "bad.json"), ConfigError);
  EXPECT_THROW(Config::load(dir / "missing.json"), IoError);
}

TEST(Variants, EachSwitchesOneComponent) {
  const auto base = valid();
  EXPECT_EQ(variant_names().front(), "full");
  for (const auto& name : variant_names()) EXPECT_NO_THROW(apply_variant(base, name).validate()) << name;
  EXPECT_FALSE(apply_variant(base, "no-rouge").rouge_guidance);
  EXPECT_EQ(apply_variant(base, "rand-mem-init").memory_init, MemoryInit::kRandom);
  EXPECT_FALSE(apply_variant(base, "no-mem-update").memory_update);
  const auto no_pmb = apply_variant(base, "no-pmb");
  EXPECT_FALSE(no_pmb.use_memory);
  EXPECT_EQ(no_pmb.lambda_p, 0.0);
  EXPECT_FALSE(no_pmb.encoder.pattern_in_feature);
  EXPECT_FALSE(apply_variant(base, "avg-pool").weighted_pool);
  EXPECT_FALSE(apply_variant(base, "no-pattern-aggr").encoder.pattern_in_feature);
  EXPECT_THROW(apply_variant(base, "bogus"), ConfigError);
}

}  // namespace
}  // namespace mtm
