// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mtm {

struct Claim {
  std::string id;
  std::string text;

  bool operator==(const Claim&) const = default;
};

struct Sentence {
  std::size_t index = 0;
  std::string text;

  bool operator==(const Sentence&) const = default;
};

struct Article {
  std::string id;
  std::string source;
  std::vector<Sentence> sentences;

  /// Sentences joined with single spaces.
  std::string full_text() const;

  bool operator==(const Article&) const = default;
};

struct RelevanceLabel {
  std::string claim_id;
  std::string article_id;
  int label = 0;

  bool operator==(const RelevanceLabel&) const = default;
};

// ---------------------------------------------------------------------------
// JSONL ingestion. Unknown fields are ignored; blank lines are skipped.

std::vector<Claim> load_claims(const std::filesystem::path& path);
std::vector<Article> load_articles(const std::filesystem::path& path);
/// Labels are checked for duplicate (claim, article) pairs only; use
/// validate_labels() to check referenced ids.
std::vector<RelevanceLabel> load_labels(const std::filesystem::path& path);

void validate_labels(const std::vector<RelevanceLabel>& labels,
                     const std::vector<Claim>& claims,
                     const std::vector<Article>& articles);

void write_claims(const std::filesystem::path& path, const std::vector<Claim>& claims);
void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles);
void write_labels(const std::filesystem::path& path, const std::vector<RelevanceLabel>& labels);

// ---------------------------------------------------------------------------
// Text processing.

/// Splits on . ! ? ; and newline. A run of terminators stays with the
/// sentence it closes; fragments are trimmed and empty ones dropped.
std::vector<Sentence> segment_sentences(std::string_view raw);

/// Lowercases ASCII letters and splits on whitespace (ASCII, U+00A0,
/// U+3000) and ASCII punctuation. Punctuation is not emitted.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kCls = 1;
  static constexpr std::int32_t kSep = 2;
  static constexpr std::int32_t kUnk = 3;
  static constexpr std::int32_t kNumSpecial = 4;

  Vocabulary();

  /// Builds from raw texts. Ids follow descending frequency, ties broken
  /// lexicographically; tokens rarer than min_freq are dropped.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_freq = 1);

  /// Rebuilds from an id-ordered token list (specials included).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::int32_t id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  /// Corpus frequency recorded at build time (0 for specials or loaded vocabularies).
  std::size_t frequency(std::string_view token) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::unordered_map<std::string, std::size_t> freq_;
};

/// A [CLS] claim [SEP] sentence [SEP] sequence. segment is 0 over the
/// claim span (including [CLS] and the first [SEP]) and 1 afterwards.
struct TokenSeq {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> segment;

  std::size_t size() const { return ids.size(); }
  bool operator==(const TokenSeq&) const = default;
};

/// Sentence tokens are truncated before claim tokens; the three special
/// tokens are always kept. max_len must be at least 8.
TokenSeq tokenize_pair(std::string_view claim, std::string_view sentence,
                       const Vocabulary& vocab, std::size_t max_len);
TokenSeq tokenize_pair(const std::vector<std::string>& claim_tokens,
                       const std::vector<std::string>& sentence_tokens,
                       const Vocabulary& vocab, std::size_t max_len);

}  // namespace mtm
