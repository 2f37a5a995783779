// SPDX-License-Identifier: Apache-2.0
#include "mtm/encoder.hpp"

#include <cmath>
#include <random>

#include "mtm/error.hpp"

namespace mtm {
namespace {

constexpr double kEmbeddingStd = 0.1;

void add_linear(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                double gain, std::mt19937_64& rng) {
  store.add(prefix + ".weight", {in, out}, normal_values(in * out, gain / std::sqrt(double(in)), rng));
  store.add(prefix + ".bias", {out}, std::vector<double>(out, 0.0));
}

void add_norm(ParameterStore& store, const std::string& prefix, std::size_t dim) {
  store.add(prefix + ".gain", {dim}, std::vector<double>(dim, 1.0));
  store.add(prefix + ".bias", {dim}, std::vector<double>(dim, 0.0));
}

void add_block(ParameterStore& store, const std::string& prefix, const EncoderConfig& c,
               std::mt19937_64& rng) {
  add_norm(store, prefix + ".ln1", c.dim);
  add_linear(store, prefix + ".qkv", c.dim, 3 * c.dim, 1.0, rng);
  add_linear(store, prefix + ".out", c.dim, c.dim, 0.5, rng);
  add_norm(store, prefix + ".ln2", c.dim);
  add_linear(store, prefix + ".ffn1", c.dim, c.ffn_mult * c.dim, 1.0, rng);
  add_linear(store, prefix + ".ffn2", c.ffn_mult * c.dim, c.dim, 0.5, rng);
}

Tensor linear(const Tensor& x, const std::string& prefix, const Binding& p) {
  return add(matmul(x, p(prefix + ".weight")), p(prefix + ".bias"));
}

Tensor norm(const Tensor& x, const std::string& prefix, const Binding& p) {
  return layer_norm(x, p(prefix + ".gain"), p(prefix + ".bias"));
}

// Pre-norm block: x + MHA(LN(x)), then + FFN(LN(.)).
Tensor transformer_block(const Tensor& x, const std::string& prefix, const EncoderConfig& c,
                         const Binding& p) {
  const std::size_t dh = c.dim / c.heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor qkv = linear(norm(x, prefix + ".ln1", p), prefix + ".qkv", p);
  std::vector<Tensor> heads;
  heads.reserve(c.heads);
  for (std::size_t h = 0; h < c.heads; ++h) {
    const Tensor q = slice(qkv, 1, h * dh, (h + 1) * dh);
    const Tensor k = slice(qkv, 1, c.dim + h * dh, c.dim + (h + 1) * dh);
    const Tensor v = slice(qkv, 1, 2 * c.dim + h * dh, 2 * c.dim + (h + 1) * dh);
    const Tensor attn = softmax(scale(matmul(q, transpose(k)), inv_scale));
    heads.push_back(matmul(attn, v));
  }
  const Tensor merged = c.heads == 1 ? heads[0] : concat(heads, 1);
  const Tensor h1 = add(x, linear(merged, prefix + ".out", p));
  const Tensor ff = linear(gelu(linear(norm(h1, prefix + ".ln2", p), prefix + ".ffn1", p)), prefix + ".ffn2", p);
  return add(h1, ff);
}

Tensor mlp(const Tensor& x, const std::string& prefix, const Binding& p) {
  const Tensor in = reshape(x, {1, x.size()});
  const Tensor hidden = gelu(linear(in, prefix + ".fc1", p));
  const Tensor out = sigmoid(linear(hidden, prefix + ".fc2", p));
  return reshape(out, {out.size()});
}

}  // namespace

void EncoderConfig::validate() const {
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw ConfigError("encoder: dim (" + std::to_string(dim) + ") must be a positive multiple of heads (" +
                      std::to_string(heads) + ")");
  }
  if (arp_layers < 1) throw ConfigError("encoder: arp_layers must be at least 1");
  if (max_len < 8) throw ConfigError("encoder: max_len must be at least 8");
  if (vocab_size <= static_cast<std::size_t>(Vocabulary::kNumSpecial)) {
    throw ConfigError("encoder: vocab_size must exceed the special tokens");
  }
  if (ffn_mult == 0) throw ConfigError("encoder: ffn_mult must be positive");
}

EncoderModel EncoderModel::create(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderModel model;
  model.config_ = config;
  std::mt19937_64 rng(seed);
  auto& s = model.params_;
  s.add("embed.token", {config.vocab_size, config.dim},
        normal_values(config.vocab_size * config.dim, kEmbeddingStd, rng));
  s.add("embed.segment", {2, config.dim}, normal_values(2 * config.dim, kEmbeddingStd, rng));
  s.add("embed.position", {config.max_len, config.dim},
        std::vector<double>(config.max_len * config.dim, 0.0));
  add_block(s, "rot", config, rng);
  for (std::size_t l = 0; l < config.arp_layers; ++l) add_block(s, "arp." + std::to_string(l), config, rng);
  add_linear(s, "rouge_head.fc1", config.dim, config.dim, 1.0, rng);
  add_linear(s, "rouge_head.fc2", config.dim, 2, 1.0, rng);
  add_linear(s, "predict_head.fc1", config.feature_dim(), config.dim, 1.0, rng);
  add_linear(s, "predict_head.fc2", config.dim, 1, 1.0, rng);
  return model;
}

EncoderModel EncoderModel::from_parameters(const EncoderConfig& config, ParameterStore params) {
  config.validate();
  const EncoderModel reference = create(config, 0);
  for (const auto& [name, p] : reference.params().all()) {
    if (!params.contains(name)) throw ParseError("checkpoint is missing parameter \"" + name + "\"");
    if (params.at(name).shape != p.shape) {
      throw ParseError("checkpoint parameter \"" + name + "\" has shape " + shape_string(params.at(name).shape) +
                       ", expected " + shape_string(p.shape));
    }
  }
  EncoderModel model;
  model.config_ = config;
  for (const auto& [name, p] : params.all()) {
    if (reference.params().contains(name)) model.params_.add(name, p.shape, p.value);
  }
  return model;
}

std::vector<std::string> EncoderModel::rot_parameter_names() const {
  auto names = params_.names_with_prefix("embed.");
  for (auto& n : params_.names_with_prefix("rot.")) names.push_back(std::move(n));
  return names;
}

std::vector<std::string> EncoderModel::rouge_head_names() const {
  return params_.names_with_prefix("rouge_head.");
}

std::vector<std::string> EncoderModel::arp_parameter_names() const {
  auto names = params_.names_with_prefix("arp.");
  for (auto& n : params_.names_with_prefix("predict_head.")) names.push_back(std::move(n));
  return names;
}

PairEncoding encode_rot(const TokenSeq& pair, const EncoderConfig& config, const Binding& params) {
  if (pair.size() > config.max_len) {
    throw ContractError("encode_rot: sequence of " + std::to_string(pair.size()) + " tokens exceeds max_len " +
                        std::to_string(config.max_len));
  }
  if (pair.size() == 0 || pair.segment.size() != pair.size()) {
    throw ContractError("encode_rot: malformed token sequence");
  }
  const Tensor tok = embedding_lookup(params("embed.token"), pair.ids);
  const std::vector<std::int32_t> segment(pair.segment.begin(), pair.segment.end());
  const Tensor seg = embedding_lookup(params("embed.segment"), segment);
  const Tensor pos = slice(params("embed.position"), 0, 0, pair.size());
  const Tensor x = add(add(tok, seg), pos);
  return PairEncoding{transformer_block(x, "rot", config, params), pair};
}

PairEncoding encode_rot(const TokenSeq& pair, const EncoderModel& model) {
  return encode_rot(pair, model.config(), Binding(model.params()));
}

PairEncoding encode_arp(const PairEncoding& enc, const EncoderConfig& config, const Binding& params) {
  Tensor x = enc.z;
  for (std::size_t l = 0; l < config.arp_layers; ++l) {
    x = transformer_block(x, "arp." + std::to_string(l), config, params);
  }
  return PairEncoding{x, enc.tokens};
}

PairEncoding encode_arp(const PairEncoding& enc, const EncoderModel& model) {
  return encode_arp(enc, model.config(), Binding(model.params()));
}

Tensor rouge_head(const PairEncoding& enc, const Binding& params) {
  return mlp(row(enc.z, 0), "rouge_head", params);
}

Tensor rouge_head(const PairEncoding& enc, const EncoderModel& model) {
  return rouge_head(enc, Binding(model.params()));
}

Tensor predict_head(const Tensor& feature, const Binding& params) {
  return reshape(mlp(feature, "predict_head", params), {});
}

Tensor drift_penalty(const ParameterStore& store, const Binding& params) {
  if (!store.has_snapshot()) throw ContractError("rot_pretrain_loss: no parameter snapshot taken");
  std::vector<Tensor> terms;
  for (const auto& [name, theta0] : store.snapshot()) {
    const Tensor live = params(name);
    terms.push_back(squared_error(live, Tensor::constant(live.shape(), theta0)));
  }
  Tensor total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  return total;
}

Tensor rot_pretrain_loss(const Tensor& predicted, const Tensor& target, const ParameterStore& store,
                         const Binding& params, double lambda_r) {
  return add(squared_error(predicted, target), scale(drift_penalty(store, params), lambda_r));
}

std::vector<double> avg_token_embedding(const std::vector<std::int32_t>& ids, const EncoderModel& model) {
  if (ids.empty()) throw ContractError("avg_token_embedding: text has no tokens");
  const auto& table = model.params().at("embed.token");
  const std::size_t dim = model.config().dim;
  std::vector<double> out(dim, 0.0);
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) * dim >= table.value.size()) {
      throw LookupError("avg_token_embedding: id " + std::to_string(id) + " outside the embedding table");
    }
    for (std::size_t j = 0; j < dim; ++j) out[j] += table.value[static_cast<std::size_t>(id) * dim + j];
  }
  for (auto& v : out) v /= static_cast<double>(ids.size());
  return out;
}

std::vector<double> avg_token_embedding(std::string_view text, const Vocabulary& vocab,
                                        const EncoderModel& model) {
  std::vector<std::int32_t> ids;
  for (const auto& t : tokenize(text)) ids.push_back(vocab.id(t));
  return avg_token_embedding(ids, model);
}

std::pair<Tensor, Tensor> mean_pool(const PairEncoding& enc) {
  const auto& seg = enc.tokens.segment;
  if (seg.size() != enc.z.rows()) throw ContractError("mean_pool: segment flags do not match the encoding");
  std::vector<std::size_t> claim_rows, sentence_rows;
  std::size_t last_claim = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (seg[i] == 0) last_claim = i;
  }
  for (std::size_t i = 1; i < seg.size(); ++i) {
    if (seg[i] == 0 && i != last_claim) claim_rows.push_back(i);
    if (seg[i] == 1 && i + 1 != seg.size()) sentence_rows.push_back(i);
  }
  if (claim_rows.empty() || sentence_rows.empty()) {
    throw ContractError("mean_pool: empty claim or sentence segment");
  }
  return {mean_rows(enc.z, claim_rows), mean_rows(enc.z, sentence_rows)};
}

}  // namespace mtm
