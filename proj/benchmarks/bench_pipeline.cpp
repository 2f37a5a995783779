// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>
#include <set>

#include "mtm/ranker.hpp"
#include "mtm/retrieval.hpp"
#include "mtm/rouge.hpp"
#include "mtm/synthetic.hpp"

namespace {

const mtm::SyntheticCorpus& corpus() {
  static const auto c = mtm::generate_synthetic_corpus(7, 200, 600);
  return c;
}

const mtm::TrainedModel& model() {
  static const mtm::TrainedModel m = [] {
    std::vector<std::string> texts;
    for (const auto& c : corpus().claims) texts.push_back(c.text);
    for (const auto& a : corpus().articles) {
      for (const auto& s : a.sentences) texts.push_back(s.text);
    }
    mtm::Config cfg;
    cfg.encoder.dim = 64;
    cfg.encoder.heads = 4;
    cfg.encoder.arp_layers = 2;
    cfg.memory_size = 8;
    cfg.k1 = 20;
    auto tm = mtm::initial_model(cfg, mtm::Vocabulary::build(texts));
    std::mt19937_64 rng(5);
    mtm::MemoryBank bank;
    for (std::size_t i = 0; i < cfg.memory_size; ++i) bank.patterns.push_back(mtm::normal_values(64, 0.1, rng));
    tm.bank = bank;
    return tm;
  }();
  return m;
}

void BM_Rouge2(benchmark::State& state) {
  const auto q = mtm::tokenize(corpus().claims[0].text);
  const auto s = mtm::tokenize(corpus().articles[0].full_text());
  for (auto _ : state) benchmark::DoNotOptimize(mtm::rouge2(q, s));
}
BENCHMARK(BM_Rouge2);

void BM_IndexBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mtm::InvertedIndex::build(corpus().articles));
}
BENCHMARK(BM_IndexBuild)->Unit(benchmark::kMillisecond);

void BM_RetrieveCandidates(benchmark::State& state) {
  const auto index = mtm::InvertedIndex::build(corpus().articles);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& c = corpus().claims[i++ % corpus().claims.size()];
    benchmark::DoNotOptimize(mtm::retrieve_candidates(c, index, 20));
  }
}
BENCHMARK(BM_RetrieveCandidates);

// One article through key-sentence selection, the interaction stack and the
// prediction head, forward only.
void BM_ForwardArticle(benchmark::State& state) {
  const auto& m = model();
  const auto q = mtm::prepare_claim(corpus().claims[0], m.vocab, m.encoder);
  const auto d = mtm::prepare_article(corpus().articles[0], m.vocab, m.encoder);
  const mtm::Binding params(m.encoder.params());
  for (auto _ : state) benchmark::DoNotOptimize(mtm::forward_article(q, d, m, params).prediction.score);
}
BENCHMARK(BM_ForwardArticle)->Unit(benchmark::kMillisecond);

// The same with the matching loss and a full backward pass.
void BM_TrainStep(benchmark::State& state) {
  auto m = model();
  const auto q = mtm::prepare_claim(corpus().claims[0], m.vocab, m.encoder);
  const auto d = mtm::prepare_article(corpus().articles[0], m.vocab, m.encoder);
  const auto names = m.encoder.arp_parameter_names();
  const std::set<std::string> trainable(names.begin(), names.end());
  for (auto _ : state) {
    const mtm::Binding params(m.encoder.params(), [&](const std::string& n) { return trainable.count(n) > 0; });
    mtm::backward(mtm::matching_loss(mtm::forward_article(q, d, m, params).y_hat, 1, 3.0));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
