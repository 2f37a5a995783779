// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtm/corpus.hpp"

namespace mtm {

struct Bm25Params {
  double k = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc = 0;  // position in InvertedIndex::article_ids()
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Term -> postings over a fixed article set. Immutable after build.
class InvertedIndex {
 public:
  static InvertedIndex build(const std::vector<Article>& articles);

  std::size_t n_docs() const { return article_ids_.size(); }
  double avg_doc_len() const { return avg_doc_len_; }
  const std::vector<std::string>& article_ids() const { return article_ids_; }
  const std::vector<std::uint32_t>& doc_lens() const { return doc_lens_; }

  /// Empty span when the term is not indexed.
  const std::vector<Posting>& postings(const std::string& term) const;
  std::size_t doc_freq(const std::string& term) const { return postings(term).size(); }
  std::size_t term_count() const { return postings_.size(); }
  std::uint32_t doc_index(const std::string& article_id) const;  // LookupError if absent

  /// Number of occurrences of term in the article (0 when absent).
  std::uint32_t term_frequency(const std::string& term, std::uint32_t doc) const;

  /// Binary layout (little-endian):
  ///   magic "MTMIDX01" | u32 version | u64 n_docs | f64 avg_doc_len
  ///   n_docs x { u32 id_len | id bytes | u32 doc_len }
  ///   u64 n_terms | n_terms x { u32 term_len | term bytes | u32 n_postings |
  ///                             n_postings x { u32 doc | u32 tf } }
  /// Terms are written in lexicographic order.
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

  bool operator==(const InvertedIndex&) const = default;

 private:
  std::vector<std::string> article_ids_;
  std::vector<std::uint32_t> doc_lens_;
  double avg_doc_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::uint32_t> doc_lookup_;
};

double bm25_idf(std::size_t n_docs, std::size_t doc_freq);

/// Okapi BM25 of an article for a tokenized query. Repeated query tokens
/// contribute once per occurrence.
double bm25_score(const std::vector<std::string>& query_tokens, const std::string& article_id,
                  const InvertedIndex& index, const Bm25Params& params = {});

struct Candidate {
  std::string article_id;
  double score = 0.0;
};

struct CandidateSet {
  std::string claim_id;
  std::vector<Candidate> entries;  // descending score, ties by ascending id
};

/// Top-k1 articles with positive score.
CandidateSet retrieve_candidates(const Claim& claim, const InvertedIndex& index, std::size_t k1,
                                 const Bm25Params& params = {});

}  // namespace mtm
