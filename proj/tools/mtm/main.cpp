// SPDX-License-Identifier: Apache-2.0
// mtm: command-line front end for the reranking pipeline.

#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "mtm/config.hpp"
#include "mtm/corpus.hpp"
#include "mtm/error.hpp"
#include "mtm/log.hpp"
#include "mtm/memory.hpp"
#include "mtm/ranker.hpp"
#include "mtm/retrieval.hpp"
#include "mtm/synthetic.hpp"
#include "mtm/training.hpp"
#include "records.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mtm::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Config file first, then any flag given on the command line.
class ConfigOptions {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", path_, "JSON config file")->check(CLI::ExistingFile);
    add(app, "--seed", &Config::seed);
    add(app, "--k1", &Config::k1);
    add(app, "--k2", &Config::k2);
    add(app, "--memory-size", &Config::memory_size);
    add(app, "--epochs", &Config::epochs);
    add(app, "--patience", &Config::patience);
    add(app, "--batch-size", &Config::batch_size);
    add(app, "--learning-rate", &Config::learning_rate);
    add(app, "--lambda-q", &Config::lambda_q);
    add(app, "--lambda-p", &Config::lambda_p);
    add(app, "--lambda-m", &Config::lambda_m);
    add(app, "--lambda-r", &Config::lambda_r);
    add(app, "--rot-epochs", &Config::rot_epochs);
    add(app, "--rot-max-pairs", &Config::rot_max_pairs);
    add_encoder(app, "--dim", &EncoderConfig::dim);
    add_encoder(app, "--heads", &EncoderConfig::heads);
    add_encoder(app, "--arp-layers", &EncoderConfig::arp_layers);
    add_encoder(app, "--max-len", &EncoderConfig::max_len);
  }

  Config resolve() const {
    Config c = path_.empty() ? Config{} : Config::load(path_);
    for (const auto& apply : overrides_) apply(c);
    return c;
  }

  const std::string& path() const { return path_; }

 private:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, T Config::*field) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value);
    overrides_.push_back([opt, value, field](Config& c) {
      if (opt->count() > 0) c.*field = *value;
    });
  }
  template <typename T>
  void add_encoder(CLI::App* app, const std::string& flag, T EncoderConfig::*field) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value);
    overrides_.push_back([opt, value, field](Config& c) {
      if (opt->count() > 0) c.encoder.*field = *value;
    });
  }

  std::string path_;
  std::vector<std::function<void(Config&)>> overrides_;
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

std::vector<std::string> vocab_texts(const std::vector<Claim>& claims, const std::vector<Article>& articles) {
  std::vector<std::string> texts;
  for (const auto& c : claims) texts.push_back(c.text);
  for (const auto& a : articles) {
    for (const auto& s : a.sentences) texts.push_back(s.text);
  }
  return texts;
}

// Inputs shared by the commands that train.
struct TrainInputs {
  std::string claims, articles, labels, vocab, index;

  void attach(CLI::App* app) {
    app->add_option("--claims", claims, "training claims (jsonl)")->required()->check(CLI::ExistingFile);
    app->add_option("--articles", articles, "articles (jsonl)")->required()->check(CLI::ExistingFile);
    app->add_option("--labels", labels, "relevance labels (jsonl)")->required()->check(CLI::ExistingFile);
    app->add_option("--vocab", vocab, "vocabulary file; built from the inputs when absent")
        ->check(CLI::ExistingFile);
    app->add_option("--index", index, "BM25 index; built from the articles when absent")->check(CLI::ExistingFile);
  }
};

struct LoadedData {
  std::vector<Claim> claims;
  std::vector<Article> articles;
  std::vector<RelevanceLabel> labels;
  Vocabulary vocab;
  InvertedIndex index;
};

LoadedData load_training_inputs(const TrainInputs& in, RunManifest& manifest) {
  LoadedData d;
  d.claims = load_claims(in.claims);
  d.articles = load_articles(in.articles);
  d.labels = load_labels(in.labels);
  manifest.add_input("claims", in.claims);
  manifest.add_input("articles", in.articles);
  manifest.add_input("labels", in.labels);
  if (in.vocab.empty()) {
    d.vocab = Vocabulary::build(vocab_texts(d.claims, d.articles));
  } else {
    d.vocab = Vocabulary::load(in.vocab);
    manifest.add_input("vocab", in.vocab);
  }
  if (in.index.empty()) {
    d.index = InvertedIndex::build(d.articles);
  } else {
    d.index = InvertedIndex::load(in.index);
    manifest.add_input("index", in.index);
  }
  return d;
}

std::vector<std::size_t> parse_ks(const std::vector<std::size_t>& ks) {
  for (auto k : ks) {
    if (k == 0) throw ConfigError("--k values must be positive");
  }
  return ks;
}

void write_text(const fs::path& path, const std::string& content) { write_file_atomic(path, content); }

// Commands ------------------------------------------------------------------

struct GenSynthetic {
  std::uint64_t seed = 7;
  std::size_t claims = 200;
  std::size_t articles = 600;
  std::size_t holdout = 0;
  std::string out_dir;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--claims", claims, "number of claims");
    app->add_option("--articles", articles, "number of articles");
    app->add_option("--holdout", holdout, "also write the last N claims as test_claims.jsonl, the rest as train_claims.jsonl");
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    if (holdout >= claims) throw ConfigError("--holdout must be smaller than --claims");
    const SyntheticCorpus corpus = generate_synthetic_corpus(seed, claims, articles);
    RunManifest manifest("gen-synthetic", seed);
    manifest.set_config({{"claims", claims}, {"articles", articles}, {"holdout", holdout}});
    write_claims(out / "claims.jsonl", corpus.claims);
    write_articles(out / "articles.jsonl", corpus.articles);
    write_labels(out / "labels.jsonl", corpus.labels);
    std::string planted;
    for (const auto& p : corpus.planted) {
      planted += json{{"claim_id", p.claim_id},
                      {"article_id", p.article_id},
                      {"quote_index", p.quote_index},
                      {"pattern_index", p.pattern_index}}
                     .dump() +
                 "\n";
    }
    write_text(out / "planted.jsonl", planted);
    for (const char* name : {"claims.jsonl", "articles.jsonl", "labels.jsonl", "planted.jsonl"}) {
      manifest.add_output(fs::path(name).stem().string(), out / name);
    }
    if (holdout > 0) {
      const auto split = corpus.claims.end() - static_cast<std::ptrdiff_t>(holdout);
      write_claims(out / "train_claims.jsonl", std::vector<Claim>(corpus.claims.begin(), split));
      write_claims(out / "test_claims.jsonl", std::vector<Claim>(split, corpus.claims.end()));
      manifest.add_output("train_claims", out / "train_claims.jsonl");
      manifest.add_output("test_claims", out / "test_claims.jsonl");
    }
    manifest.add_timing("total", sw.lap());
    manifest.write(out);
  }
};

struct BuildVocab {
  std::vector<std::string> claims;
  std::string articles, out_dir;
  std::size_t min_freq = 1;

  void attach(CLI::App* app) {
    app->add_option("--claims", claims, "claim files whose text enters the vocabulary")->check(CLI::ExistingFile);
    app->add_option("--articles", articles)->required()->check(CLI::ExistingFile);
    app->add_option("--min-freq", min_freq, "drop tokens seen fewer times");
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    RunManifest manifest("build-vocab", 0);
    manifest.set_config({{"min_freq", min_freq}});
    std::vector<Claim> all_claims;
    for (const auto& path : claims) {
      for (auto& c : load_claims(path)) all_claims.push_back(std::move(c));
      manifest.add_input("claims", path);
    }
    const auto arts = load_articles(articles);
    manifest.add_input("articles", articles);
    const Vocabulary vocab = Vocabulary::build(vocab_texts(all_claims, arts), min_freq);
    vocab.save(out / "vocab.txt");
    manifest.add_output("vocab", out / "vocab.txt");
    manifest.set_extra("vocab_size", vocab.size());
    manifest.add_timing("total", sw.lap());
    manifest.write(out);
    log::info("vocabulary of " + std::to_string(vocab.size()) + " tokens");
  }
};

struct Index {
  std::string articles, out_dir;

  void attach(CLI::App* app) {
    app->add_option("--articles", articles)->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    RunManifest manifest("index", 0);
    const auto index = InvertedIndex::build(load_articles(articles));
    manifest.add_input("articles", articles);
    index.save(out / "index.bin");
    manifest.add_output("index", out / "index.bin");
    manifest.set_extra("documents", index.n_docs());
    manifest.set_extra("terms", index.term_count());
    manifest.add_timing("total", sw.lap());
    manifest.write(out);
  }
};

struct Retrieve {
  std::string claims, index, out_dir;
  ConfigOptions config;

  void attach(CLI::App* app) {
    app->add_option("--claims", claims)->required()->check(CLI::ExistingFile);
    app->add_option("--index", index)->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir)->required();
    config.attach(app);
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    const Config cfg = config.resolve();
    cfg.validate();
    RunManifest manifest("retrieve", cfg.seed);
    manifest.set_config(cfg.to_json());
    const auto idx = InvertedIndex::load(index);
    const auto cs = load_claims(claims);
    manifest.add_input("claims", claims);
    manifest.add_input("index", index);
    std::vector<CandidateSet> sets;
    for (const auto& c : cs) sets.push_back(retrieve_candidates(c, idx, cfg.k1, cfg.bm25));
    write_text(out / "candidates.jsonl", candidates_jsonl(sets));
    manifest.add_output("candidates", out / "candidates.jsonl");
    manifest.add_timing("total", sw.lap());
    manifest.write(out);
  }
};

struct PretrainRot {
  TrainInputs inputs;
  ConfigOptions config;
  std::string out_dir;

  void attach(CLI::App* app) {
    inputs.attach(app);
    config.attach(app);
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    Config cfg = config.resolve();
    cfg.epochs = 0;
    RunManifest manifest("pretrain-rot", cfg.seed);
    manifest.set_config(cfg.to_json());
    const LoadedData d = load_training_inputs(inputs, manifest);
    manifest.add_timing("load", sw.lap());
    const TrainingData data{d.claims, d.articles, d.labels, d.index};
    const TrainResult result = train(data, cfg, d.vocab);
    manifest.add_timing("pretrain", sw.lap());
    save_model(out / "rot_model.ckpt", result.model);
    write_text(out / "rot_log.json", training_log_json(result.log).dump(2) + "\n");
    manifest.add_output("model", out / "rot_model.ckpt");
    manifest.add_output("log", out / "rot_log.json");
    manifest.write(out);
  }
};

struct Train {
  TrainInputs inputs;
  ConfigOptions config;
  std::string pretrained, out_dir;

  void attach(CLI::App* app) {
    inputs.attach(app);
    config.attach(app);
    app->add_option("--pretrained", pretrained, "checkpoint from pretrain-rot; skips ROT pretraining")
        ->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    const Config cfg = config.resolve();
    RunManifest manifest("train", cfg.seed);
    manifest.set_config(cfg.to_json());
    const LoadedData d = load_training_inputs(inputs, manifest);
    std::optional<TrainedModel> pre;
    if (!pretrained.empty()) {
      pre = load_model(pretrained);
      manifest.add_input("pretrained", pretrained);
    }
    manifest.add_timing("load", sw.lap());
    const TrainingData data{d.claims, d.articles, d.labels, d.index};
    const TrainResult result = train(data, cfg, d.vocab, pre ? &*pre : nullptr);
    manifest.add_timing("train", sw.lap());
    save_model(out / "model.ckpt", result.model);
    write_text(out / "training_log.json", training_log_json(result.log).dump(2) + "\n");
    write_text(out / "memory_trace.jsonl", memory_trace_jsonl(result.log.trace));
    manifest.add_output("model", out / "model.ckpt");
    manifest.add_output("log", out / "training_log.json");
    manifest.add_output("memory_trace", out / "memory_trace.jsonl");
    manifest.write(out);
  }
};

struct Rerank {
  std::string model, claims, articles, candidates, out_dir;

  void attach(CLI::App* app) {
    app->add_option("--model", model)->required()->check(CLI::ExistingFile);
    app->add_option("--claims", claims)->required()->check(CLI::ExistingFile);
    app->add_option("--articles", articles)->required()->check(CLI::ExistingFile);
    app->add_option("--candidates", candidates, "output of retrieve")->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    const TrainedModel m = load_model(model);
    RunManifest manifest("rerank", m.config.seed);
    manifest.set_config(m.config.to_json());
    const auto cs = load_claims(claims);
    const auto arts = load_articles(articles);
    const auto sets = load_candidates(candidates);
    manifest.add_input("model", model);
    manifest.add_input("claims", claims);
    manifest.add_input("articles", articles);
    manifest.add_input("candidates", candidates);
    manifest.add_timing("load", sw.lap());
    const ArticleLookup lookup = make_article_lookup(arts);
    std::unordered_map<std::string, const Claim*> by_id;
    for (const auto& c : cs) by_id[c.id] = &c;
    std::vector<RankedResult> results;
    for (const auto& set : sets) {
      const auto it = by_id.find(set.claim_id);
      if (it == by_id.end()) throw ValidationError("candidates name unknown claim \"" + set.claim_id + "\"");
      results.push_back(rerank(*it->second, set, lookup, m));
    }
    manifest.add_timing("rerank", sw.lap());
    write_text(out / "rankings.jsonl", rankings_jsonl(results));
    manifest.add_output("rankings", out / "rankings.jsonl");
    manifest.write(out);
  }
};

struct Eval {
  std::string rankings, labels, out_dir;
  std::vector<std::size_t> ks{1, 3, 5};
  bool drop_unrecalled = false;

  void attach(CLI::App* app) {
    app->add_option("--rankings", rankings, "rankings.jsonl or candidates.jsonl")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
    app->add_option("--k", ks, "cutoffs for MAP@k and HIT@k")->delimiter(',');
    app->add_flag("--drop-unrecalled", drop_unrecalled, "skip claims whose ranking holds no relevant article");
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    RunManifest manifest("eval", 0);
    manifest.set_config({{"k", ks}, {"drop_unrecalled", drop_unrecalled}});
    const auto lines = load_ranking_ids(rankings);
    const auto ls = load_labels(labels);
    manifest.add_input("rankings", rankings);
    manifest.add_input("labels", labels);
    const EvalReport report = evaluate_rankings(lines, ls, parse_ks(ks), drop_unrecalled);
    const json j = {{"metrics", report.metrics}, {"evaluated", report.evaluated}, {"dropped", report.dropped}};
    write_text(out / "eval.json", j.dump(2) + "\n");
    manifest.add_output("report", out / "eval.json");
    manifest.add_timing("total", sw.lap());
    manifest.write(out);
    std::cout << j["metrics"].dump() << "\n";
  }
};

struct InspectMemory {
  std::string model, out_dir;

  void attach(CLI::App* app) {
    app->add_option("--model", model)->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    const auto out = prepare_out_dir(out_dir);
    const TrainedModel m = load_model(model);
    RunManifest manifest("inspect-memory", m.config.seed);
    manifest.add_input("model", model);
    json j;
    if (!m.bank) {
      j = {{"patterns", json::array()}, {"size", 0}};
    } else {
      const MemoryBank& bank = *m.bank;
      json patterns = json::array();
      for (std::size_t i = 0; i < bank.size(); ++i) {
        json dist = json::array();
        for (std::size_t k = 0; k < bank.size(); ++k) dist.push_back(distance(bank.patterns[i], bank.patterns[k]));
        patterns.push_back({{"index", i}, {"norm", l2(bank.patterns[i])}, {"distances", dist},
                            {"vector", bank.patterns[i]}});
      }
      j = {{"size", bank.size()}, {"dim", bank.dim()}, {"epoch", bank.epoch}, {"patterns", patterns}};
    }
    write_text(out / "memory.json", j.dump(2) + "\n");
    manifest.add_output("memory", out / "memory.json");
    manifest.write(out);
    std::cout << "patterns " << j["size"] << "\n";
    for (const auto& p : j["patterns"]) std::cout << "  " << p["index"] << " norm " << p["norm"] << "\n";
  }
};

struct Ablate {
  TrainInputs inputs;
  ConfigOptions config;
  std::string test_claims, out_dir;
  std::vector<std::string> variants;
  std::vector<std::size_t> ks{1, 3, 5};

  void attach(CLI::App* app) {
    inputs.attach(app);
    config.attach(app);
    app->add_option("--test-claims", test_claims, "held-out claims to rerank and score")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--variant", variants, "variant to run (repeatable); all when absent")
        ->check(CLI::IsMember(variant_names()));
    app->add_option("--k", ks, "cutoffs for MAP@k and HIT@k")->delimiter(',');
    app->add_option("--out-dir", out_dir)->required();
  }

  void run() const {
    Stopwatch sw;
    const auto out = prepare_out_dir(out_dir);
    const Config base = config.resolve();
    RunManifest manifest("ablate", base.seed);
    manifest.set_config(base.to_json());
    const LoadedData d = load_training_inputs(inputs, manifest);
    const auto tests = load_claims(test_claims);
    manifest.add_input("test_claims", test_claims);
    const std::vector<std::string> chosen = variants.empty() ? variant_names() : variants;
    const TrainingData data{d.claims, d.articles, d.labels, d.index};
    const ArticleLookup lookup = make_article_lookup(d.articles);
    std::vector<CandidateSet> sets;
    for (const auto& c : tests) sets.push_back(retrieve_candidates(c, d.index, base.k1, base.bm25));
    std::vector<RankingLine> bm25_lines;
    for (const auto& s : sets) {
      RankingLine line{s.claim_id, {}};
      for (const auto& e : s.entries) line.article_ids.push_back(e.article_id);
      bm25_lines.push_back(std::move(line));
    }
    const EvalReport bm25 = evaluate_rankings(bm25_lines, d.labels, ks, true);
    manifest.add_timing("load", sw.lap());

    // Variants that keep ROUGE guidance share one pretraining run.
    std::optional<TrainedModel> pretrained;
    json summary = {{"bm25", {{"metrics", bm25.metrics}, {"evaluated", bm25.evaluated}, {"dropped", bm25.dropped}}},
                    {"variants", json::object()}};
    for (const auto& name : chosen) {
      const Config cfg = apply_variant(base, name);
      const TrainedModel* pre = nullptr;
      if (cfg.rouge_guidance) {
        if (!pretrained) {
          Config rot_cfg = base;
          rot_cfg.epochs = 0;
          pretrained = train(data, rot_cfg, d.vocab).model;
          manifest.add_timing("pretrain-rot", sw.lap());
        }
        pre = &*pretrained;
      }
      log::info("ablate: variant " + name);
      const TrainResult result = train(data, cfg, d.vocab, pre);
      std::vector<RankedResult> results;
      std::vector<RankingLine> lines;
      for (std::size_t i = 0; i < tests.size(); ++i) {
        results.push_back(rerank(tests[i], sets[i], lookup, result.model));
        RankingLine line{tests[i].id, {}};
        for (const auto& p : results.back().ranking) line.article_ids.push_back(p.article_id);
        lines.push_back(std::move(line));
      }
      const EvalReport report = evaluate_rankings(lines, d.labels, ks, true);
      const auto dir = prepare_out_dir((out / name).string());
      const json j = {{"variant", name},
                      {"metrics", report.metrics},
                      {"evaluated", report.evaluated},
                      {"dropped", report.dropped},
                      {"training", training_log_json(result.log)}};
      write_text(dir / "eval.json", j.dump(2) + "\n");
      write_text(dir / "rankings.jsonl", rankings_jsonl(results));
      manifest.add_output(name + "/eval", dir / "eval.json");
      summary["variants"][name] = {{"metrics", report.metrics}, {"evaluated", report.evaluated}};
      manifest.add_timing(name, sw.lap());
      std::cout << name << " " << report.metrics.dump() << "\n";
    }
    write_text(out / "ablation.json", summary.dump(2) + "\n");
    manifest.add_output("summary", out / "ablation.json");
    manifest.write(out);
  }
};

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::kIo:
    case Error::Category::kConfig:
      return kExitUsage;
    case Error::Category::kParse:
    case Error::Category::kValidation:
      return kExitData;
    case Error::Category::kContract:
      return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace
}  // namespace mtm::cli

int main(int argc, char** argv) {
  using namespace mtm::cli;
  CLI::App app{"Claim-to-article reranking with ROUGE-guided key-sentence selection and a pattern memory"};
  app.require_subcommand(1);
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "only warnings and errors");
  app.add_flag("-v,--verbose", verbose, "debug logging");

  GenSynthetic gen;
  BuildVocab vocab;
  Index index;
  Retrieve retrieve;
  PretrainRot pretrain;
  Train train_cmd;
  Rerank rerank_cmd;
  Eval eval;
  InspectMemory inspect;
  Ablate ablate;
  std::function<void()> action;
  auto sub = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* s = app.add_subcommand(name, help);
    cmd.attach(s);
    s->callback([&action, &cmd] { action = [&cmd] { cmd.run(); }; });
  };
  sub("gen-synthetic", "write a seeded synthetic corpus", gen);
  sub("build-vocab", "build the token vocabulary", vocab);
  sub("index", "build the BM25 inverted index", index);
  sub("retrieve", "BM25 top-k1 candidates per claim", retrieve);
  sub("pretrain-rot", "ROUGE-guided pretraining and memory initialisation", pretrain);
  sub("train", "full training pipeline", train_cmd);
  sub("rerank", "rerank retrieved candidates with a trained model", rerank_cmd);
  sub("eval", "MRR, MAP@k and HIT@k of a ranking file", eval);
  sub("inspect-memory", "dump the pattern memory of a model", inspect);
  sub("ablate", "train and score component ablations", ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (quiet) mtm::log::set_level(mtm::log::Level::kWarning);
  if (verbose) mtm::log::set_level(mtm::log::Level::kDebug);
  try {
    action();
  } catch (const mtm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
