// SPDX-License-Identifier: Apache-2.0
#include "mtm/training.hpp"

#include <algorithm>
#include <chrono>
#include <iterator>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "mtm/error.hpp"
#include "mtm/log.hpp"
#include "mtm/metrics.hpp"
#include "mtm/rouge.hpp"

namespace mtm {
namespace {

// Sentence tokens per article, computed once.
class TokenCache {
 public:
  explicit TokenCache(const std::vector<Article>& articles) : lookup_(make_article_lookup(articles)) {}

  const Article& article(const std::string& id) const {
    const auto it = lookup_.find(id);
    if (it == lookup_.end()) throw LookupError("unknown article \"" + id + "\"");
    return *it->second;
  }

  const std::vector<std::vector<std::string>>& sentences(const std::string& id) {
    auto it = tokens_.find(id);
    if (it != tokens_.end()) return it->second;
    std::vector<std::vector<std::string>> out;
    for (const auto& s : article(id).sentences) out.push_back(tokenize(s.text));
    return tokens_.emplace(id, std::move(out)).first->second;
  }

 private:
  ArticleLookup lookup_;
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> tokens_;
};

std::map<std::string, std::set<std::string>> positives_by_claim(const std::vector<RelevanceLabel>& labels) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& l : labels) {
    if (l.label == 1) out[l.claim_id].insert(l.article_id);
  }
  return out;
}

std::vector<std::string> candidate_and_positive_ids(const Claim& claim, const TrainingData& data, std::size_t k1,
                                                    const Bm25Params& bm25,
                                                    const std::map<std::string, std::set<std::string>>& positives) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& c : retrieve_candidates(claim, data.index, k1, bm25).entries) {
    ids.push_back(c.article_id);
    seen.insert(c.article_id);
  }
  if (const auto it = positives.find(claim.id); it != positives.end()) {
    for (const auto& p : it->second) {
      if (!seen.count(p)) ids.push_back(p);
    }
  }
  return ids;
}

Tensor rouge_target(const RougeTarget& t) { return Tensor::vector({t.precision, t.recall}); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Copies the named tensors of `from` into `to`; shapes must agree.
void copy_parameters(const ParameterStore& from, ParameterStore& to, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (!from.contains(name)) throw ConfigError("pretrained model lacks parameter \"" + name + "\"");
    if (from.at(name).shape != to.at(name).shape) {
      throw ConfigError("pretrained parameter \"" + name + "\" has shape " + shape_string(from.at(name).shape) +
                        ", expected " + shape_string(to.at(name).shape));
    }
    to.at(name).value = from.at(name).value;
  }
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_claims(std::size_t n_claims,
                                                                           double val_fraction,
                                                                           std::uint64_t seed) {
  std::vector<std::size_t> order(n_claims);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n_claims)));
  if (val_fraction > 0.0 && n_claims >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n_claims - 1);
  if (n_claims < 2) n_val = 0;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

std::vector<RougePair> collect_rouge_pairs(const TrainingData& data, const std::vector<std::size_t>& claim_indices,
                                           std::size_t k1, std::size_t max_pairs, double overlap_share,
                                           std::uint64_t seed) {
  TokenCache cache(data.articles);
  const auto positives = positives_by_claim(data.labels);
  std::vector<RougePair> pairs;
  for (const std::size_t ci : claim_indices) {
    const Claim& claim = data.claims.at(ci);
    const auto q_tokens = tokenize(claim.text);
    if (q_tokens.empty()) continue;
    for (const auto& id : candidate_and_positive_ids(claim, data, k1, {}, positives)) {
      const auto& sentences = cache.sentences(id);
      for (std::size_t s = 0; s < sentences.size(); ++s) {
        if (sentences[s].empty()) continue;
        pairs.push_back({ci, id, s, rouge2(q_tokens, sentences[s])});
      }
    }
  }
  if (pairs.size() <= max_pairs) return pairs;
  // Pairs with any bigram overlap are rare; keep up to overlap_share of the
  // budget for them and fill the rest with zero-target pairs.
  std::vector<RougePair> overlap, zero;
  for (auto& p : pairs) (p.target.precision > 0.0 || p.target.recall > 0.0 ? overlap : zero).push_back(std::move(p));
  std::mt19937_64 rng(seed);
  std::shuffle(overlap.begin(), overlap.end(), rng);
  std::shuffle(zero.begin(), zero.end(), rng);
  const auto want = static_cast<std::size_t>(std::llround(overlap_share * static_cast<double>(max_pairs)));
  const std::size_t n_overlap = std::min(overlap.size(), std::max(want, max_pairs - std::min(max_pairs, zero.size())));
  std::vector<RougePair> out(std::make_move_iterator(overlap.begin()),
                             std::make_move_iterator(overlap.begin() + static_cast<std::ptrdiff_t>(n_overlap)));
  for (std::size_t i = 0; out.size() < max_pairs && i < zero.size(); ++i) out.push_back(std::move(zero[i]));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

double rouge_head_mse(const TrainedModel& model, const TrainingData& data, const std::vector<RougePair>& pairs) {
  if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
  TokenCache cache(data.articles);
  const Binding params(model.encoder.params());
  double total = 0.0;
  for (const auto& p : pairs) {
    const TokenSeq seq = tokenize_pair(tokenize(data.claims.at(p.claim).text), cache.sentences(p.article_id).at(p.sentence),
                                       model.vocab, model.config.encoder.max_len);
    const Tensor pred = rouge_head(encode_rot(seq, model.config.encoder, params), params);
    total += squared_error(pred, rouge_target(p.target)).item();
  }
  return total / static_cast<double>(pairs.size());
}

RotPretrainLog pretrain_rot(TrainedModel& model, const TrainingData& data, const std::vector<RougePair>& train,
                            const std::vector<RougePair>& holdout) {
  const Config& cfg = model.config;
  RotPretrainLog log;
  log.train_pairs = train.size();
  log.holdout_pairs = holdout.size();
  log.holdout_mse_before = rouge_head_mse(model, data, holdout);

  ParameterStore& store = model.encoder.params();
  const auto drift_names = model.encoder.rot_parameter_names();
  std::vector<std::string> names = drift_names;
  for (auto& n : model.encoder.rouge_head_names()) names.push_back(std::move(n));
  const std::set<std::string> trainable(names.begin(), names.end());
  store.take_snapshot(drift_names);

  TokenCache cache(data.articles);
  std::vector<std::vector<std::string>> claim_tokens(data.claims.size());
  for (std::size_t i = 0; i < data.claims.size(); ++i) claim_tokens[i] = tokenize(data.claims[i].text);

  AdamOptimizer opt(cfg.rot_learning_rate);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.rot_epochs && !train.empty(); ++epoch) {
    std::mt19937_64 rng(cfg.seed + 7919 * (epoch + 1));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.rot_batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.rot_batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      const Binding params(store, [&](const std::string& n) { return trainable.count(n) > 0; });
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const RougePair& p = train[order[i]];
        const TokenSeq seq = tokenize_pair(claim_tokens.at(p.claim), cache.sentences(p.article_id).at(p.sentence),
                                           model.vocab, cfg.encoder.max_len);
        const Tensor pred = rouge_head(encode_rot(seq, cfg.encoder, params), params);
        const Tensor loss = scale(squared_error(pred, rouge_target(p.target)), inv_b);
        batch_loss += loss.item();
        backward(loss);
      }
      const Tensor penalty = scale(drift_penalty(store, params), cfg.lambda_r);
      batch_loss += penalty.item();
      backward(penalty);
      params.accumulate_gradients(store);
      opt.step(store, names);
      epoch_loss += batch_loss * static_cast<double>(end - start);
      ++log.steps;
    }
    log.epoch_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    log::info("rot epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(log.epoch_loss.back()));
  }
  store.clear_snapshot();
  store.zero_grad();
  log.holdout_mse_after = rouge_head_mse(model, data, holdout);
  return log;
}

double validation_mrr(const TrainedModel& model, const TrainingData& data,
                      const std::vector<std::size_t>& claim_indices) {
  const auto positives = positives_by_claim(data.labels);
  const ArticleLookup lookup = make_article_lookup(data.articles);
  EvalInput input;
  for (const std::size_t ci : claim_indices) {
    const Claim& claim = data.claims.at(ci);
    const auto pos = positives.find(claim.id);
    if (pos == positives.end()) continue;
    const CandidateSet cands = retrieve_candidates(claim, data.index, model.config.k1, model.config.bm25);
    const bool any = std::any_of(cands.entries.begin(), cands.entries.end(),
                                 [&](const Candidate& c) { return pos->second.count(c.article_id) > 0; });
    if (!any) continue;
    EvalQuery q{claim.id, {}, pos->second};
    for (const auto& p : rerank(claim, cands, lookup, model).ranking) q.ranking.push_back(p.article_id);
    input.push_back(std::move(q));
  }
  if (input.empty()) return std::numeric_limits<double>::quiet_NaN();
  return mrr(input);
}

TrainResult train(const TrainingData& data, const Config& config, const Vocabulary& vocab,
                  const TrainedModel* pretrained) {
  const auto t_start = std::chrono::steady_clock::now();
  const Vocabulary& used_vocab = pretrained ? pretrained->vocab : vocab;
  TrainResult result;
  TrainedModel& model = result.model;
  TrainingLog& log = result.log;
  model = initial_model(config, used_vocab);
  const Config& cfg = model.config;
  {
    // Labels of claims outside this training set (e.g. the test split) are ignored.
    std::set<std::string> claim_ids;
    for (const auto& c : data.claims) claim_ids.insert(c.id);
    std::vector<RelevanceLabel> own;
    std::copy_if(data.labels.begin(), data.labels.end(), std::back_inserter(own),
                 [&](const RelevanceLabel& l) { return claim_ids.count(l.claim_id) > 0; });
    validate_labels(own, data.claims, data.articles);
  }

  auto [train_idx, val_idx] = split_claims(data.claims.size(), cfg.val_fraction, cfg.seed);
  if (train_idx.empty()) throw ValidationError("train: no training claims");
  for (auto i : train_idx) log.train_claims.push_back(data.claims[i].id);
  for (auto i : val_idx) log.val_claims.push_back(data.claims[i].id);

  // Stage 1: ROUGE-guided pretraining of the embeddings and the ROT block.
  if (pretrained != nullptr) {
    auto names = model.encoder.rot_parameter_names();
    for (auto& n : model.encoder.rouge_head_names()) names.push_back(std::move(n));
    copy_parameters(pretrained->encoder.params(), model.encoder.params(), names);
    log.rot.skipped = true;
  } else if (cfg.rouge_guidance) {
    const auto train_pairs = collect_rouge_pairs(data, train_idx, cfg.k1, cfg.rot_max_pairs, cfg.rot_overlap_share, cfg.seed);
    auto holdout_src = val_idx.empty() ? train_idx : val_idx;
    const auto holdout = collect_rouge_pairs(data, holdout_src, cfg.k1, cfg.rot_holdout_pairs, cfg.rot_overlap_share, cfg.seed + 1);
    log.rot = pretrain_rot(model, data, train_pairs, holdout);
    log::info("rot held-out mse " + std::to_string(log.rot.holdout_mse_before) + " -> " +
              std::to_string(log.rot.holdout_mse_after));
  } else {
    log.rot.skipped = true;
  }

  if (cfg.arp_from_rot) {
    ParameterStore& store = model.encoder.params();
    for (const auto& name : store.names_with_prefix("rot.")) {
      const std::string field = name.substr(4);
      for (std::size_t l = 0; l < cfg.encoder.arp_layers; ++l) {
        store.at("arp." + std::to_string(l) + "." + field).value = store.at(name).value;
      }
    }
  }

  // Embeddings are frozen from here on, so prepared texts stay valid.
  const auto positives = positives_by_claim(data.labels);
  std::unordered_map<std::string, PreparedArticle> prepared_articles;
  const ArticleLookup lookup = make_article_lookup(data.articles);
  auto article = [&](const std::string& id) -> const PreparedArticle& {
    auto it = prepared_articles.find(id);
    if (it != prepared_articles.end()) return it->second;
    const auto a = lookup.find(id);
    if (a == lookup.end()) throw LookupError("unknown article \"" + id + "\"");
    return prepared_articles.emplace(id, prepare_article(*a->second, model.vocab, model.encoder)).first->second;
  };
  std::vector<PreparedClaim> prepared_claims(data.claims.size());
  for (auto i : train_idx) prepared_claims[i] = prepare_claim(data.claims[i], model.vocab, model.encoder);

  // Stage 2: residuals of training claims against their relevant articles.
  if (cfg.use_memory) {
    std::vector<ResidualRecord> records;
    for (auto i : train_idx) {
      const auto pos = positives.find(data.claims[i].id);
      if (pos == positives.end()) continue;
      for (const auto& id : pos->second) {
        const PreparedArticle& d = article(id);
        for (std::size_t s = 0; s < d.size(); ++s) {
          records.push_back(make_residual_record(data.claims[i].id, id, d.sentence_index[s],
                                                 prepared_claims[i].embedding, d.embeddings[s]));
        }
      }
    }
    if (records.empty()) throw ValidationError("train: no residuals; training claims have no relevant sentences");
    if (cfg.t_low) {
      log.t_low = *cfg.t_low;
      log.t_high = *cfg.t_high;
    } else {
      std::tie(log.t_low, log.t_high) = compute_thresholds(records, cfg.q_low, cfg.q_high);
    }
    const auto valid = filter_valid(records, log.t_low, log.t_high);
    log.residuals = records.size();
    log.valid_residuals = valid.size();
    model.bank = cfg.memory_init == MemoryInit::kKMeans ? init_memory(valid, cfg.memory_size, cfg.seed)
                                                        : random_memory(records, cfg.memory_size, cfg.seed);
    log::info("memory: " + std::to_string(valid.size()) + " of " + std::to_string(records.size()) +
              " residuals valid; " + std::to_string(model.bank->size()) + " patterns");
  }

  // Stage 3: relevance training of the interaction blocks and the head.
  std::vector<Claim> train_claims;
  std::vector<CandidateSet> train_candidates;
  for (auto i : train_idx) {
    train_claims.push_back(data.claims[i]);
    train_candidates.push_back(retrieve_candidates(data.claims[i], data.index, cfg.k1, cfg.bm25));
  }
  std::vector<TrainingPair> pairs = make_training_pairs(train_claims, train_candidates, data.labels);
  for (auto& p : pairs) p.claim = train_idx[p.claim];
  log.training_pairs = pairs.size();
  const auto n_pos = static_cast<double>(std::count_if(pairs.begin(), pairs.end(), [](const TrainingPair& p) {
    return p.label == 1;
  }));
  const double n_neg = static_cast<double>(pairs.size()) - n_pos;
  log.positive_weight = n_pos > 0.0 ? std::clamp(n_neg / n_pos, 1.0, cfg.pos_weight_cap) : 1.0;

  const auto names = model.encoder.arp_parameter_names();
  const std::set<std::string> trainable(names.begin(), names.end());
  AdamOptimizer opt(cfg.learning_rate);
  FeedbackLedger ledger(model.bank ? model.bank->size() : 0);

  struct Snapshot {
    ParameterStore params;
    std::optional<MemoryBank> bank;
  };
  std::optional<Snapshot> best;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t_epoch = std::chrono::steady_clock::now();
    std::mt19937_64 rng(cfg.seed + 104729 * epoch);
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog elog;
    elog.epoch = epoch;
    ParameterStore& store = model.encoder.params();
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      const Binding params(store, [&](const std::string& n) { return trainable.count(n) > 0; });
      double batch_loss = 0.0;
      std::size_t batch_count = 0;
      for (std::size_t i = start; i < end; ++i) {
        const TrainingPair& pair = pairs[order[i]];
        const ArticleForward fwd = forward_article(prepared_claims[pair.claim], article(pair.article_id), model, params);
        if (!fwd.y_hat.defined()) continue;
        const Tensor loss = matching_loss(fwd.y_hat, pair.label, log.positive_weight);
        loss_sum += loss.item();
        ++loss_count;
        batch_loss += loss.item();
        ++batch_count;
        backward(scale(loss, inv_b));

        if (!model.bank) continue;
        const double y_hat = fwd.prediction.score;
        const bool right = (y_hat > 0.5) == (pair.label == 1);
        const std::size_t n_keys = cfg.record_all_key_sentences ? fwd.keys.sentences.size() : 1;
        for (std::size_t k = 0; k < n_keys && k < fwd.keys.sentences.size(); ++k) {
          const ScoredSentence& key = fwd.keys.sentences[k];
          ResidualRecord rec{data.claims[pair.claim].id, pair.article_id, key.sentence_index, key.residual,
                             l2(key.residual)};
          ledger.record(*key.pattern, {std::move(rec), std::abs(y_hat - 0.5)}, right);
          log.trace.push_back({epoch, data.claims[pair.claim].id, pair.article_id, key.sentence_index, *key.pattern,
                               std::abs(y_hat - 0.5), right});
          ++elog.feedback;
          ++(right ? elog.right : elog.wrong);
        }
      }
      params.accumulate_gradients(store);
      opt.step(store, names);
      elog.step_losses.push_back(batch_count ? batch_loss / static_cast<double>(batch_count) : 0.0);
    }
    elog.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;

    if (model.bank) {
      if (cfg.memory_update) {
        const MemoryBank before = *model.bank;
        model.bank = epoch_update(before, ledger, cfg.lambda_m);
        for (std::size_t j = 0; j < before.size(); ++j) {
          if (before.patterns[j] != model.bank->patterns[j]) ++elog.patterns_moved;
        }
      } else {
        ledger.clear();
        ++model.bank->epoch;
      }
    }
    store.zero_grad();

    if (!val_idx.empty()) elog.val_mrr = validation_mrr(model, data, val_idx);
    elog.seconds = seconds_since(t_epoch);
    log::info("epoch " + std::to_string(epoch) + " loss " + std::to_string(elog.mean_loss) + " val_mrr " +
              std::to_string(elog.val_mrr) + " (" + std::to_string(elog.seconds) + " s)");
    log.epochs.push_back(elog);

    const bool improved = std::isnan(elog.val_mrr) || std::isnan(log.best_val_mrr) ||
                          elog.val_mrr > log.best_val_mrr;
    if (improved) {
      best = Snapshot{model.encoder.params(), model.bank};
      log.best_epoch = epoch;
      log.best_val_mrr = elog.val_mrr;
      since_best = 0;
    } else if (++since_best >= cfg.patience && cfg.patience > 0) {
      log::info("early stop after epoch " + std::to_string(epoch));
      break;
    }
  }
  if (best) {
    model.encoder = EncoderModel::from_parameters(cfg.encoder, best->params);
    model.bank = best->bank;
  }
  log::info("training finished in " + std::to_string(seconds_since(t_start)) + " s");
  return result;
}

}  // namespace mtm
