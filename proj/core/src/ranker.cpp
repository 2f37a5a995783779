// SPDX-License-Identifier: Apache-2.0
#include "mtm/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mtm/error.hpp"
#include "mtm/log.hpp"

namespace mtm {
namespace {

using json = nlohmann::json;

std::vector<std::int32_t> to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

std::string pattern_name(std::size_t i) { return "pattern_" + std::to_string(i); }

}  // namespace

TrainedModel initial_model(Config config, Vocabulary vocab) {
  config.encoder.vocab_size = vocab.size();
  config.validate();
  TrainedModel m;
  m.encoder = EncoderModel::create(config.encoder, config.seed);
  m.config = std::move(config);
  m.vocab = std::move(vocab);
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  json meta = {{"format", "mtm-model"},
               {"version", 1},
               {"config", model.config.to_json()},
               {"vocab", model.vocab.tokens()}};
  ParameterStore store;
  for (const auto& [name, p] : model.encoder.params().all()) store.add(name, p.shape, p.value);
  if (model.bank) {
    meta["bank"] = {{"size", model.bank->size()}, {"epoch", model.bank->epoch}};
    for (std::size_t i = 0; i < model.bank->size(); ++i) {
      store.add(pattern_name(i), {model.bank->patterns[i].size()}, model.bank->patterns[i]);
    }
  } else {
    meta["bank"] = nullptr;
  }
  save_checkpoint(path, store, meta.dump());
}

TrainedModel load_model(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  json meta;
  try {
    meta = json::parse(ckpt.meta);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": metadata is not JSON: " + e.what());
  }
  if (meta.value("format", "") != "mtm-model") throw ParseError(path.string() + ": not a model checkpoint");
  TrainedModel m;
  m.config = Config::from_json(meta.at("config"));
  m.vocab = Vocabulary::from_tokens(meta.at("vocab").get<std::vector<std::string>>());
  if (m.vocab.size() != m.config.encoder.vocab_size) {
    throw ParseError(path.string() + ": vocabulary size does not match the configuration");
  }
  m.encoder = EncoderModel::from_parameters(m.config.encoder, ckpt.params);
  if (!meta.at("bank").is_null()) {
    MemoryBank bank;
    bank.epoch = meta["bank"].at("epoch").get<std::size_t>();
    const auto k = meta["bank"].at("size").get<std::size_t>();
    for (std::size_t i = 0; i < k; ++i) {
      if (!ckpt.params.contains(pattern_name(i))) throw ParseError(path.string() + ": missing " + pattern_name(i));
      bank.patterns.push_back(ckpt.params.at(pattern_name(i)).value);
    }
    m.bank = std::move(bank);
  }
  return m;
}

PreparedClaim prepare_claim(const Claim& claim, const Vocabulary& vocab, const EncoderModel& encoder) {
  PreparedClaim p;
  p.id = claim.id;
  p.tokens = tokenize(claim.text);
  if (p.tokens.empty()) throw ContractError("claim \"" + claim.id + "\" has no tokens");
  p.embedding = avg_token_embedding(to_ids(p.tokens, vocab), encoder);
  return p;
}

PreparedArticle prepare_article(const Article& article, const Vocabulary& vocab, const EncoderModel& encoder) {
  PreparedArticle p;
  p.id = article.id;
  for (const auto& s : article.sentences) {
    auto tokens = tokenize(s.text);
    if (tokens.empty()) continue;
    p.embeddings.push_back(avg_token_embedding(to_ids(tokens, vocab), encoder));
    p.sentence_index.push_back(s.index);
    p.tokens.push_back(std::move(tokens));
  }
  return p;
}

std::vector<double> scale_scores(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(values.size(), 1.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = 1.0 - (values[i] - min) / range;
  }
  return out;
}

std::vector<ScoredSentence> score_sentences(const PreparedClaim& claim, const PreparedArticle& article,
                                            const MemoryBank* bank, double lambda_q, double lambda_p) {
  const std::size_t n = article.size();
  std::vector<ScoredSentence> out(n);
  std::vector<double> d_claim(n), d_pattern(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].sentence_index = article.sentence_index[i];
    out[i].position = i;
    out[i].residual = residual(claim.embedding, article.embeddings[i]);
    d_claim[i] = l2(out[i].residual);
    if (bank != nullptr && bank->size() > 0) {
      const NearestPattern np = nearest_pattern(out[i].residual, *bank);
      out[i].pattern = np.index;
      d_pattern[i] = np.distance;
    }
  }
  const auto s_q = scale_scores(d_claim);
  const auto s_p = scale_scores(d_pattern);
  const bool has_bank = bank != nullptr && bank->size() > 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i].scr_q = s_q[i];
    out[i].scr_p = has_bank ? s_p[i] : 0.0;
    out[i].scr = lambda_q * out[i].scr_q + lambda_p * out[i].scr_p;
  }
  return out;
}

KeySentences select_key_sentences(std::vector<ScoredSentence> scored, std::size_t k2) {
  std::sort(scored.begin(), scored.end(), [](const ScoredSentence& a, const ScoredSentence& b) {
    if (a.scr != b.scr) return a.scr > b.scr;
    return a.sentence_index < b.sentence_index;
  });
  if (scored.size() > k2) scored.resize(k2);
  KeySentences keys;
  double total = 0.0;
  for (const auto& s : scored) total += s.scr;
  for (const auto& s : scored) {
    keys.weights.push_back(total > 0.0 ? s.scr / total : 1.0 / static_cast<double>(scored.size()));
  }
  keys.sentences = std::move(scored);
  return keys;
}

Tensor build_feature(const Tensor& q_pooled, const Tensor& s_pooled, const Vec* pattern) {
  if (q_pooled.shape() != s_pooled.shape() || q_pooled.rank() != 1) {
    throw DimensionError("build_feature", "pooled vectors " + shape_string(q_pooled.shape()) + " and " +
                                              shape_string(s_pooled.shape()));
  }
  if (pattern == nullptr) return concat({q_pooled, s_pooled}, 0);
  if (pattern->size() != q_pooled.size()) {
    throw DimensionError("build_feature", "pattern of size " + std::to_string(pattern->size()) +
                                              " against dim " + std::to_string(q_pooled.size()));
  }
  return concat({q_pooled, s_pooled, Tensor::vector(*pattern)}, 0);
}

ArticleForward forward_article(const PreparedClaim& claim, const PreparedArticle& article,
                               const TrainedModel& model, const Binding& params) {
  const Config& cfg = model.config;
  const MemoryBank* bank = cfg.use_memory && model.bank ? &*model.bank : nullptr;
  if (cfg.use_memory && bank == nullptr) throw ContractError("forward_article: model has no memory bank");

  ArticleForward out;
  out.prediction.claim_id = claim.id;
  out.prediction.article_id = article.id;
  if (article.size() == 0) {
    log::warning("article " + article.id + " has no scorable sentence; scoring it 0");
    return out;
  }
  out.keys = select_key_sentences(score_sentences(claim, article, bank, cfg.lambda_q, cfg.lambda_p), cfg.k2);
  const std::size_t n = out.keys.sentences.size();
  Tensor aggregate;
  for (std::size_t i = 0; i < n; ++i) {
    const ScoredSentence& key = out.keys.sentences[i];
    const TokenSeq seq = tokenize_pair(claim.tokens, article.tokens[key.position], model.vocab, cfg.encoder.max_len);
    const PairEncoding arp = encode_arp(encode_rot(seq, cfg.encoder, params), cfg.encoder, params);
    const auto [q_pooled, s_pooled] = mean_pool(arp);
    const Vec* pattern = cfg.encoder.pattern_in_feature ? &bank->patterns.at(*key.pattern) : nullptr;
    const double w = cfg.weighted_pool ? out.keys.weights[i] : 1.0 / static_cast<double>(n);
    const Tensor term = scale(build_feature(q_pooled, s_pooled, pattern), w);
    aggregate = aggregate.defined() ? add(aggregate, term) : term;
    out.prediction.evidence.push_back({key.sentence_index, key.scr, key.scr_q, key.scr_p, w, key.pattern});
  }
  out.y_hat = predict_head(aggregate, params);
  out.prediction.score = out.y_hat.item();
  return out;
}

Prediction predict_article(const Claim& claim, const Article& article, const TrainedModel& model) {
  const PreparedClaim q = prepare_claim(claim, model.vocab, model.encoder);
  const PreparedArticle d = prepare_article(article, model.vocab, model.encoder);
  return forward_article(q, d, model, Binding(model.encoder.params())).prediction;
}

Tensor matching_loss(const Tensor& y_hat, int label, double positive_weight) {
  if (label != 0 && label != 1) throw ContractError("matching_loss: label must be 0 or 1");
  return binary_cross_entropy(y_hat, static_cast<double>(label), label == 1 ? positive_weight : 1.0);
}

ArticleLookup make_article_lookup(const std::vector<Article>& articles) {
  ArticleLookup lookup;
  lookup.reserve(articles.size());
  for (const auto& a : articles) lookup.emplace(a.id, &a);
  return lookup;
}

RankedResult rerank(const Claim& claim, const CandidateSet& candidates, const ArticleLookup& articles,
                    const TrainedModel& model) {
  RankedResult result;
  result.claim_id = claim.id;
  const PreparedClaim q = prepare_claim(claim, model.vocab, model.encoder);
  const Binding params(model.encoder.params());
  for (const auto& c : candidates.entries) {
    const auto it = articles.find(c.article_id);
    if (it == articles.end()) throw LookupError("rerank: unknown article \"" + c.article_id + "\"");
    const PreparedArticle d = prepare_article(*it->second, model.vocab, model.encoder);
    result.ranking.push_back(forward_article(q, d, model, params).prediction);
  }
  std::sort(result.ranking.begin(), result.ranking.end(), [](const Prediction& a, const Prediction& b) {
    return a.score != b.score ? a.score > b.score : a.article_id < b.article_id;
  });
  return result;
}

std::vector<TrainingPair> make_training_pairs(const std::vector<Claim>& claims,
                                              const std::vector<CandidateSet>& candidates,
                                              const std::vector<RelevanceLabel>& labels) {
  if (claims.size() != candidates.size()) {
    throw ContractError("make_training_pairs: one candidate set per claim required");
  }
  std::map<std::string, std::vector<std::string>> positives;
  for (const auto& l : labels) {
    if (l.label == 1) positives[l.claim_id].push_back(l.article_id);
  }
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (candidates[i].claim_id != claims[i].id) {
      throw ContractError("make_training_pairs: candidate set order does not match the claims");
    }
    const auto pos_it = positives.find(claims[i].id);
    const std::set<std::string> pos =
        pos_it == positives.end() ? std::set<std::string>{} : std::set<std::string>(pos_it->second.begin(),
                                                                                     pos_it->second.end());
    if (candidates[i].entries.empty() && pos.empty()) {
      log::warning("claim " + claims[i].id + " has no candidate and no positive; dropped");
      continue;
    }
    std::set<std::string> seen;
    for (std::size_t r = 0; r < candidates[i].entries.size(); ++r) {
      const auto& c = candidates[i].entries[r];
      seen.insert(c.article_id);
      pairs.push_back({i, c.article_id, pos.count(c.article_id) ? 1 : 0, r + 1});
    }
    for (const auto& p : pos) {
      if (!seen.count(p)) pairs.push_back({i, p, 1, std::nullopt});
    }
  }
  return pairs;
}

}  // namespace mtm
