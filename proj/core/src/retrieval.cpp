// SPDX-License-Identifier: Apache-2.0
#include "mtm/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "mtm/error.hpp"

namespace mtm {
namespace {

constexpr char kMagic[8] = {'M', 'T', 'M', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError("index file truncated");
  return v;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw ParseError("index file truncated");
  return s;
}

const std::vector<Posting> kNoPostings;

}  // namespace

InvertedIndex InvertedIndex::build(const std::vector<Article>& articles) {
  if (articles.empty()) throw ValidationError("cannot index an empty corpus");
  InvertedIndex index;
  std::uint64_t total = 0;
  for (const auto& article : articles) {
    const auto doc = static_cast<std::uint32_t>(index.article_ids_.size());
    if (!index.doc_lookup_.emplace(article.id, doc).second) {
      throw ValidationError("duplicate article id \"" + article.id + "\"");
    }
    index.article_ids_.push_back(article.id);
    const auto tokens = tokenize(article.full_text());
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, n] : tf) index.postings_[term].push_back(Posting{doc, n});
    index.doc_lens_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += tokens.size();
  }
  index.avg_doc_len_ = static_cast<double>(total) / static_cast<double>(index.n_docs());
  return index;
}

const std::vector<Posting>& InvertedIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? kNoPostings : it->second;
}

std::uint32_t InvertedIndex::doc_index(const std::string& article_id) const {
  auto it = doc_lookup_.find(article_id);
  if (it == doc_lookup_.end()) throw LookupError("article \"" + article_id + "\" is not indexed");
  return it->second;
}

std::uint32_t InvertedIndex::term_frequency(const std::string& term, std::uint32_t doc) const {
  const auto& list = postings(term);
  // Postings are appended in document order.
  auto it = std::lower_bound(list.begin(), list.end(), doc,
                             [](const Posting& p, std::uint32_t d) { return p.doc < d; });
  return (it != list.end() && it->doc == doc) ? it->tf : 0;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, n_docs());
  put<double>(out, avg_doc_len_);
  for (std::size_t d = 0; d < n_docs(); ++d) {
    put_string(out, article_ids_[d]);
    put<std::uint32_t>(out, doc_lens_[d]);
  }
  std::vector<const std::string*> terms;
  terms.reserve(postings_.size());
  for (const auto& [term, list] : postings_) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
  put<std::uint64_t>(out, terms.size());
  for (const auto* term : terms) {
    const auto& list = postings_.at(*term);
    put_string(out, *term);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      put<std::uint32_t>(out, p.doc);
      put<std::uint32_t>(out, p.tf);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + ": not an index file");
  }
  if (const auto version = get<std::uint32_t>(in); version != kVersion) {
    throw ParseError(path.string() + ": unsupported index version " + std::to_string(version));
  }
  InvertedIndex index;
  const auto n_docs = get<std::uint64_t>(in);
  index.avg_doc_len_ = get<double>(in);
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    auto id = get_string(in);
    index.doc_lookup_.emplace(id, static_cast<std::uint32_t>(d));
    index.article_ids_.push_back(std::move(id));
    index.doc_lens_.push_back(get<std::uint32_t>(in));
  }
  const auto n_terms = get<std::uint64_t>(in);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    auto term = get_string(in);
    const auto n = get<std::uint32_t>(in);
    std::vector<Posting> list(n);
    for (auto& p : list) {
      p.doc = get<std::uint32_t>(in);
      p.tf = get<std::uint32_t>(in);
      if (p.doc >= n_docs) throw ParseError(path.string() + ": posting references unknown document");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  return index;
}

double bm25_idf(std::size_t n_docs, std::size_t doc_freq) {
  const double n = static_cast<double>(n_docs);
  const double df = static_cast<double>(doc_freq);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double bm25_score(const std::vector<std::string>& query_tokens, const std::string& article_id,
                  const InvertedIndex& index, const Bm25Params& params) {
  const auto doc = index.doc_index(article_id);
  const double norm =
      params.k * (1.0 - params.b + params.b * index.doc_lens()[doc] / index.avg_doc_len());
  double score = 0.0;
  for (const auto& term : query_tokens) {
    const double tf = index.term_frequency(term, doc);
    if (tf == 0.0) continue;
    score += bm25_idf(index.n_docs(), index.doc_freq(term)) * tf * (params.k + 1.0) / (tf + norm);
  }
  return score;
}

CandidateSet retrieve_candidates(const Claim& claim, const InvertedIndex& index, std::size_t k1,
                                 const Bm25Params& params) {
  if (k1 == 0) throw ContractError("retrieve_candidates: k1 must be at least 1");
  // Term-at-a-time accumulation over the postings of each query token.
  std::vector<double> scores(index.n_docs(), 0.0);
  for (const auto& term : tokenize(claim.text)) {
    const auto& list = index.postings(term);
    if (list.empty()) continue;
    const double idf = bm25_idf(index.n_docs(), list.size());
    for (const auto& p : list) {
      const double tf = p.tf;
      const double norm =
          params.k * (1.0 - params.b + params.b * index.doc_lens()[p.doc] / index.avg_doc_len());
      scores[p.doc] += idf * tf * (params.k + 1.0) / (tf + norm);
    }
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t d = 0; d < scores.size(); ++d) {
    if (scores[d] > 0.0) order.push_back(d);
  }
  const auto& ids = index.article_ids();
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  const std::size_t keep = std::min(k1, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better);
  CandidateSet out{claim.id, {}};
  for (std::size_t i = 0; i < keep; ++i) out.entries.push_back({ids[order[i]], scores[order[i]]});
  return out;
}

}  // namespace mtm
