// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "mtm/error.hpp"
#include "mtm/parameters.hpp"
#include "test_util.hpp"

namespace mtm {
namespace {

TEST(ParameterStore, AddAndLookup) {
  ParameterStore s;
  s.add("a.w", {2, 2}, {1, 2, 3, 4});
  s.add("b", {1}, {5});
  EXPECT_EQ(s.parameter_count(), 5u);
  EXPECT_EQ(s.names_with_prefix("a."), (std::vector<std::string>{"a.w"}));
  EXPECT_THROW(s.add("b", {1}, {0}), ContractError);
  EXPECT_THROW(s.add("c", {3}, {0}), DimensionError);
  EXPECT_THROW(s.at("zz"), LookupError);
}

TEST(ParameterStore, SnapshotIsFrozen) {
  ParameterStore s;
  s.add("w", {2}, {1, 2});
  s.take_snapshot({"w"});
  s.at("w").value[0] = 10;
  EXPECT_EQ(s.snapshot().at("w"), (std::vector<double>{1, 2}));
}

TEST(Binding, TrainableNamesBecomeLeaves) {
  ParameterStore s;
  s.add("w", {2}, {1, 2});
  s.add("c", {2}, {3, 4});
  const Binding b(s, [](const std::string& n) { return n == "w"; });
  EXPECT_TRUE(b("w").requires_grad());
  EXPECT_FALSE(b("c").requires_grad());
  EXPECT_EQ(b("w").node(), b("w").node());
  backward(sum(mul(b("w"), b("c"))));
  s.zero_grad();
  b.accumulate_gradients(s);
  EXPECT_EQ(s.at("w").grad, (std::vector<double>{3, 4}));
  EXPECT_EQ(s.at("c").grad, (std::vector<double>{0, 0}));
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterStore s;
  s.add("p", {2}, {1.5, -2});
  s.zero_grad();
  AdamOptimizer adam(0.1);
  adam.step(s, {"p"});
  EXPECT_EQ(s.at("p").value, (std::vector<double>{1.5, -2}));
}

// t=1, g=1: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1, step = lr / (1 + eps).
TEST(Adam, FirstStepHandValue) {
  ParameterStore s;
  s.add("p", {}, {0.0});
  s.at("p").grad = {1.0};
  AdamOptimizer adam(0.1, 0.9, 0.999, 1e-6);
  adam.step(s, {"p"});
  const double m = 0.1, v = 0.001;
  const double m_hat = m / (1 - 0.9), v_hat = v / (1 - 0.999);
  EXPECT_NEAR(s.at("p").value[0], -0.1 * m_hat / (std::sqrt(v_hat) + 1e-6), 1e-15);
  EXPECT_NEAR(s.at("p").value[0], -0.1 / (1 + 1e-6), 1e-15);
}

TEST(Adam, ConstantPositiveGradientDecreasesMonotonically) {
  ParameterStore s;
  s.add("p", {}, {1.0});
  AdamOptimizer adam(0.1);
  double prev = 1.0;
  for (int i = 0; i < 2; ++i) {
    s.at("p").grad = {0.5};
    adam.step(s, {"p"});
    EXPECT_LT(s.at("p").value[0], prev);
    prev = s.at("p").value[0];
  }
  EXPECT_EQ(adam.steps(), 2u);
}

TEST(Adam, MissingGradientIsContractError) {
  ParameterStore s;
  s.add("p", {}, {1.0});
  AdamOptimizer adam(0.1);
  EXPECT_THROW(adam.step(s, {"p"}), ContractError);
}

TEST(Checkpoint, RoundTripIsExact) {
  testing::TempDir dir;
  ParameterStore s;
  s.add("a", {2, 3}, {1.0 / 3.0, -2, 3e-300, 4, 5, 6});
  s.add("b", {}, {7});
  save_checkpoint(dir / "m.ckpt", s, "hello\nworld");
  const auto c = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(c.meta, "hello\nworld");
  EXPECT_TRUE(c.params == s);
  EXPECT_EQ(c.params.at("a").shape, (Shape{2, 3}));
}

TEST(Checkpoint, BadHeaderIsParseError) {
  testing::TempDir dir;
  testing::write_file(dir / "m.ckpt", "something else\n");
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), ParseError);
  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt"), IoError);
}

TEST(Checkpoint, TruncatedPayloadIsParseError) {
  testing::TempDir dir;
  ParameterStore s;
  s.add("a", {4}, {1, 2, 3, 4});
  save_checkpoint(dir / "m.ckpt", s, "");
  auto bytes = testing::read_file(dir / "m.ckpt");
  bytes.resize(bytes.size() - 8);
  testing::write_file(dir / "m.ckpt", bytes);
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), ParseError);
}

TEST(NormalValues, Deterministic) {
  std::mt19937_64 a(4), b(4);
  EXPECT_EQ(normal_values(10, 0.5, a), normal_values(10, 0.5, b));
}

}  // namespace
}  // namespace mtm
