// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "gradcheck.hpp"
#include "mtm/encoder.hpp"
#include "mtm/error.hpp"

namespace mtm {
namespace {

using Matrix = std::vector<std::vector<double>>;

EncoderConfig small_config(std::size_t dim = 8, std::size_t heads = 2, std::size_t layers = 1) {
  EncoderConfig c;
  c.dim = dim;
  c.heads = heads;
  c.arp_layers = layers;
  c.max_len = 16;
  c.vocab_size = 12;
  c.ffn_mult = 2;
  return c;
}

TokenSeq sample_pair() {
  return {{Vocabulary::kCls, 5, 6, 7, Vocabulary::kSep, 8, 5, 9, Vocabulary::kSep}, {0, 0, 0, 0, 0, 1, 1, 1, 1}};
}

// Plain-loop reimplementation of the embedding and the pre-norm block.
struct Reference {
  const ParameterStore& p;
  const EncoderConfig& c;

  const std::vector<double>& v(const std::string& n) const { return p.at(n).value; }

  Matrix linear(const Matrix& x, const std::string& prefix, std::size_t in, std::size_t out) const {
    const auto& w = v(prefix + ".weight");
    const auto& b = v(prefix + ".bias");
    Matrix y(x.size(), std::vector<double>(out));
    for (std::size_t r = 0; r < x.size(); ++r)
      for (std::size_t j = 0; j < out; ++j) {
        double acc = b[j];
        for (std::size_t i = 0; i < in; ++i) acc += x[r][i] * w[i * out + j];
        y[r][j] = acc;
      }
    return y;
  }

  Matrix norm(const Matrix& x, const std::string& prefix) const {
    Matrix y = x;
    for (auto& row : y) {
      double mu = 0, var = 0;
      for (double a : row) mu += a;
      mu /= static_cast<double>(row.size());
      for (double a : row) var += (a - mu) * (a - mu);
      var /= static_cast<double>(row.size());
      for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = (row[j] - mu) / std::sqrt(var + 1e-5) * v(prefix + ".gain")[j] + v(prefix + ".bias")[j];
    }
    return y;
  }

  Matrix block(const Matrix& x, const std::string& prefix) const {
    const std::size_t n = x.size(), d = c.dim, dh = d / c.heads;
    const Matrix qkv = linear(norm(x, prefix + ".ln1"), prefix + ".qkv", d, 3 * d);
    Matrix merged(n, std::vector<double>(d, 0.0));
    for (std::size_t h = 0; h < c.heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits(n);
        double mx = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
          double dot = 0;
          for (std::size_t t = 0; t < dh; ++t) dot += qkv[i][h * dh + t] * qkv[j][d + h * dh + t];
          logits[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, logits[j]);
        }
        double z = 0;
        for (auto& l : logits) z += (l = std::exp(l - mx));
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t t = 0; t < dh; ++t) merged[i][h * dh + t] += logits[j] / z * qkv[j][2 * d + h * dh + t];
      }
    }
    const Matrix att = linear(merged, prefix + ".out", d, d);
    Matrix h1 = x;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) h1[i][j] += att[i][j];
    Matrix f = linear(norm(h1, prefix + ".ln2"), prefix + ".ffn1", d, c.ffn_mult * d);
    for (auto& row : f)
      for (auto& a : row) a = 0.5 * a * (1.0 + std::erf(a / std::sqrt(2.0)));
    const Matrix g = linear(f, prefix + ".ffn2", c.ffn_mult * d, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) h1[i][j] += g[i][j];
    return h1;
  }

  Matrix embed(const TokenSeq& seq) const {
    Matrix x(seq.size(), std::vector<double>(c.dim));
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (std::size_t j = 0; j < c.dim; ++j)
        x[i][j] = v("embed.token")[static_cast<std::size_t>(seq.ids[i]) * c.dim + j] +
                  v("embed.segment")[seq.segment[i] * c.dim + j] + v("embed.position")[i * c.dim + j];
    return x;
  }
};

void randomize_positions(EncoderModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto& pos = m.params().at("embed.position").value;
  pos = normal_values(pos.size(), 0.1, rng);
}

TEST(EncodeRot, OutputShape) {
  const auto m = EncoderModel::create(small_config(), 1);
  const auto enc = encode_rot(sample_pair(), m);
  EXPECT_EQ(enc.z.shape(), (Shape{9, 8}));
}

TEST(EncodeRot, MatchesStraightLineReimplementation) {
  auto m = EncoderModel::create(small_config(), 3);
  randomize_positions(m, 4);
  const Reference ref{m.params(), m.config()};
  const auto seq = sample_pair();
  const Matrix want = ref.block(ref.embed(seq), "rot");
  const auto got = encode_rot(seq, m);
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(got.z.at(i, j), want[i][j], 1e-12);
}

TEST(EncodeArp, MatchesStraightLineReimplementation) {
  auto m = EncoderModel::create(small_config(8, 2, 2), 6);
  randomize_positions(m, 7);
  const Reference ref{m.params(), m.config()};
  const auto seq = sample_pair();
  const Matrix want = ref.block(ref.block(ref.block(ref.embed(seq), "rot"), "arp.0"), "arp.1");
  const auto got = encode_arp(encode_rot(seq, m), m);
  EXPECT_EQ(got.z.shape(), (Shape{9, 8}));
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(got.z.at(i, j), want[i][j], 1e-12);
}

TEST(EncodeRot, PermutationEquivariantWithoutPositions) {
  const auto m = EncoderModel::create(small_config(), 2);
  auto seq = sample_pair();
  const auto a = encode_rot(seq, m);
  std::swap(seq.ids[1], seq.ids[3]);
  const auto b = encode_rot(seq, m);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(a.z.at(1, j), b.z.at(3, j), 1e-12);
    EXPECT_NEAR(a.z.at(3, j), b.z.at(1, j), 1e-12);
    EXPECT_NEAR(a.z.at(0, j), b.z.at(0, j), 1e-12);
  }
}

TEST(EncodeRot, OverlongInputIsRejected) {
  const auto m = EncoderModel::create(small_config(), 1);
  TokenSeq seq;
  seq.ids.assign(17, 5);
  seq.segment.assign(17, 0);
  EXPECT_THROW(encode_rot(seq, m), ContractError);
}

TEST(EncodeRot, Deterministic) {
  const auto m = EncoderModel::create(small_config(), 1);
  EXPECT_EQ(encode_rot(sample_pair(), m).z.values(), encode_rot(sample_pair(), m).z.values());
}

TEST(EncoderConfig, ZeroArpLayersRejected) {
  auto c = small_config();
  c.arp_layers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RougeHead, OutputInUnitInterval) {
  const auto m = EncoderModel::create(small_config(), 1);
  const auto r = rouge_head(encode_rot(sample_pair(), m), m);
  ASSERT_EQ(r.size(), 2u);
  for (double x : r.values()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(RougeHead, ZeroedHeadGivesHalf) {
  auto m = EncoderModel::create(small_config(), 1);
  for (const auto& n : m.rouge_head_names()) {
    auto& v = m.params().at(n).value;
    std::fill(v.begin(), v.end(), 0.0);
  }
  const auto r = rouge_head(encode_rot(sample_pair(), m), m);
  EXPECT_EQ(r[0], 0.5);
  EXPECT_EQ(r[1], 0.5);
}

TEST(RotPretrainLoss, Examples) {
  ParameterStore s;
  s.add("a", {}, {1.0});
  s.add("b", {}, {2.0});
  s.take_snapshot({"a", "b"});
  const Binding bind(s);
  const auto target = Tensor::vector({0.3, 0.4});
  EXPECT_EQ(rot_pretrain_loss(target, target, s, bind, 0.01).item(), 0.0);
  const auto pred = Tensor::vector({0.5, 0.1});
  EXPECT_NEAR(rot_pretrain_loss(pred, target, s, bind, 0.01).item(), 0.04 + 0.09, 1e-15);
  s.at("a").value[0] = 1.5;
  s.at("b").value[0] = 1.0;
  const Binding moved(s);
  EXPECT_NEAR(rot_pretrain_loss(pred, target, s, moved, 0.01).item(), 0.13 + 0.01 * (0.25 + 1.0), 1e-15);
}

TEST(RotPretrainLoss, MissingSnapshotIsContractError) {
  ParameterStore s;
  s.add("a", {}, {1.0});
  EXPECT_THROW(rot_pretrain_loss(Tensor::vector({0, 0}), Tensor::vector({0, 0}), s, Binding(s), 0.01),
               ContractError);
}

// One Adam-free gradient step: the displacement shrinks as lambda_r grows
// because the penalty gradient opposes motion away from the snapshot.
TEST(RotPretrainLoss, DisplacementNonIncreasingInLambda) {
  auto base = EncoderModel::create(small_config(), 8);
  randomize_positions(base, 9);
  const auto names = base.rot_parameter_names();
  // Start away from the snapshot so the penalty has a gradient.
  base.params().take_snapshot(names);
  std::mt19937_64 rng(10);
  for (const auto& n : names)
    for (auto& x : base.params().at(n).value) x += 0.01 * std::normal_distribution<double>()(rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0}) {
    EncoderModel m = base;
    auto trainable = [&](const std::string& n) { return n.rfind("embed.", 0) == 0 || n.rfind("rot.", 0) == 0; };
    const Binding bind(m.params(), trainable);
    const auto pred = rouge_head(encode_rot(sample_pair(), m.config(), bind), bind);
    backward(rot_pretrain_loss(pred, Tensor::vector({0.9, 0.1}), m.params(), bind, lambda));
    m.params().zero_grad();
    bind.accumulate_gradients(m.params());
    double disp = 0.0;
    for (const auto& n : names) {
      auto& p = m.params().at(n);
      const auto& theta0 = m.params().snapshot().at(n);
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double next = p.value[i] - 0.001 * p.grad[i];
        disp += (next - theta0[i]) * (next - theta0[i]);
      }
    }
    EXPECT_LE(disp, prev + 1e-15) << "lambda " << lambda;
    prev = disp;
  }
}

TEST(AvgTokenEmbedding, Examples) {
  const auto m = EncoderModel::create(small_config(), 1);
  const auto& table = m.params().at("embed.token").value;
  const auto row = [&](std::size_t id) {
    return std::vector<double>(table.begin() + static_cast<long>(id * 8), table.begin() + static_cast<long>((id + 1) * 8));
  };
  EXPECT_EQ(avg_token_embedding(std::vector<std::int32_t>{5}, m), row(5));
  EXPECT_EQ(avg_token_embedding(std::vector<std::int32_t>{5, 5}, m), row(5));
  const auto ab = avg_token_embedding(std::vector<std::int32_t>{5, 6}, m);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(ab[j], (row(5)[j] + row(6)[j]) / 2.0);
  const auto ba = avg_token_embedding(std::vector<std::int32_t>{6, 5}, m);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(ab[j], ba[j], 1e-15);
  EXPECT_THROW(avg_token_embedding(std::vector<std::int32_t>{}, m), ContractError);
}

TEST(MeanPool, HandCase) {
  // [CLS] q1 q2 [SEP] s1 [SEP]
  TokenSeq seq{{1, 5, 6, 2, 7, 2}, {0, 0, 0, 0, 1, 1}};
  std::vector<double> z;
  for (int i = 0; i < 6; ++i) z.insert(z.end(), {double(i), double(10 * i)});
  const auto [q, s] = mean_pool({Tensor::constant({6, 2}, z), seq});
  EXPECT_EQ(q.values(), (std::vector<double>{1.5, 15}));
  EXPECT_EQ(s.values(), (std::vector<double>{4, 40}));
}

TEST(MeanPool, ConstantOutputs) {
  const auto seq = sample_pair();
  const auto [q, s] = mean_pool({Tensor::constant({9, 3}, std::vector<double>(27, 2.5)), seq});
  EXPECT_EQ(q.values(), (std::vector<double>{2.5, 2.5, 2.5}));
  EXPECT_EQ(s.values(), (std::vector<double>{2.5, 2.5, 2.5}));
}

TEST(MeanPool, EmptySegmentIsRejected) {
  TokenSeq seq{{1, 2, 2}, {0, 0, 1}};
  EXPECT_THROW(mean_pool({Tensor::zeros({3, 2}), seq}), ContractError);
}

// Finite differences through ROT, ARP and both heads with respect to every
// parameter of a small model.
TEST(EncoderGradients, FiniteDifferenceAllParameters) {
  auto m = EncoderModel::create(small_config(4, 2, 1), 12);
  randomize_positions(m, 13);
  m.params().take_snapshot(m.rot_parameter_names());
  const auto seq = sample_pair();
  auto loss = [&](const Binding& b) {
    const auto rot = encode_rot(seq, m.config(), b);
    const auto r = rouge_head(rot, b);
    const auto [q, s] = mean_pool(encode_arp(rot, m.config(), b));
    const Tensor y = predict_head(concat({q, s, q}, 0), b);
    return add(rot_pretrain_loss(r, Tensor::vector({0.7, 0.2}), m.params(), b, 0.05),
               binary_cross_entropy(y, 1.0, 2.0));
  };
  EXPECT_LT(testing::max_store_gradient_error(m.params(), m.params().names(), loss), 1e-4);
}

}  // namespace
}  // namespace mtm
