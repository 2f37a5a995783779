// SPDX-License-Identifier: Apache-2.0
#include "mtm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mtm/error.hpp"

namespace mtm {
namespace {

using json = nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string location(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

// Calls fn(record, line_no) for every non-blank line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(location(path, line_no) + ": malformed JSON: " + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(location(path, line_no) + ": record is not an object");
    }
    fn(record, line_no);
  }
}

std::string require_string(const json& record, const char* field,
                           const std::filesystem::path& path, std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw ParseError(location(path, line_no) + ": missing string field \"" + field + "\"");
  }
  return it->get<std::string>();
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?' || c == ';'; }

// Length of a multi-byte whitespace sequence at s[i], 0 if none.
std::size_t unicode_space_len(std::string_view s, std::size_t i) {
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  if (i + 1 < s.size() && at(i) == 0xC2 && at(i + 1) == 0xA0) return 2;
  if (i + 2 < s.size() && at(i) == 0xE3 && at(i + 1) == 0x80 && at(i + 2) == 0x80) return 3;
  return 0;
}

}  // namespace

std::string Article::full_text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

std::vector<Claim> load_claims(const std::filesystem::path& path) {
  std::vector<Claim> claims;
  std::unordered_set<std::string> seen;
  for_each_record(path, [&](const json& rec, std::size_t line_no) {
    Claim c{require_string(rec, "id", path, line_no), require_string(rec, "text", path, line_no)};
    if (is_blank(c.text)) {
      throw ValidationError(location(path, line_no) + ": claim \"" + c.id + "\" has empty text");
    }
    if (!seen.insert(c.id).second) {
      throw ValidationError(location(path, line_no) + ": duplicate claim id \"" + c.id + "\"");
    }
    claims.push_back(std::move(c));
  });
  return claims;
}

std::vector<Article> load_articles(const std::filesystem::path& path) {
  std::vector<Article> articles;
  std::unordered_set<std::string> seen;
  for_each_record(path, [&](const json& rec, std::size_t line_no) {
    Article a;
    a.id = require_string(rec, "id", path, line_no);
    a.source = require_string(rec, "source", path, line_no);
    if (auto it = rec.find("sentences"); it != rec.end()) {
      if (!it->is_array()) throw ParseError(location(path, line_no) + ": \"sentences\" is not an array");
      for (const auto& s : *it) {
        if (!s.is_string()) throw ParseError(location(path, line_no) + ": non-string sentence");
        std::string text = trim(s.get<std::string>());
        if (text.empty()) {
          throw ValidationError(location(path, line_no) + ": article \"" + a.id + "\" has an empty sentence");
        }
        a.sentences.push_back(Sentence{a.sentences.size(), std::move(text)});
      }
    } else if (auto t = rec.find("text"); t != rec.end() && t->is_string()) {
      a.sentences = segment_sentences(t->get<std::string>());
    } else {
      throw ParseError(location(path, line_no) + ": article needs \"sentences\" or \"text\"");
    }
    if (a.sentences.empty()) {
      throw ValidationError(location(path, line_no) + ": article \"" + a.id + "\" has zero sentences");
    }
    if (!seen.insert(a.id).second) {
      throw ValidationError(location(path, line_no) + ": duplicate article id \"" + a.id + "\"");
    }
    articles.push_back(std::move(a));
  });
  return articles;
}

std::vector<RelevanceLabel> load_labels(const std::filesystem::path& path) {
  std::vector<RelevanceLabel> labels;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_record(path, [&](const json& rec, std::size_t line_no) {
    RelevanceLabel l;
    l.claim_id = require_string(rec, "claim_id", path, line_no);
    l.article_id = require_string(rec, "article_id", path, line_no);
    auto it = rec.find("label");
    if (it == rec.end() || !it->is_number_integer()) {
      throw ParseError(location(path, line_no) + ": missing integer field \"label\"");
    }
    l.label = it->get<int>();
    if (l.label != 0 && l.label != 1) {
      throw ValidationError(location(path, line_no) + ": label must be 0 or 1");
    }
    if (!seen.emplace(l.claim_id, l.article_id).second) {
      throw ValidationError(location(path, line_no) + ": duplicate label for (" + l.claim_id + ", " +
                            l.article_id + ")");
    }
    labels.push_back(std::move(l));
  });
  return labels;
}

void validate_labels(const std::vector<RelevanceLabel>& labels, const std::vector<Claim>& claims,
                     const std::vector<Article>& articles) {
  std::unordered_set<std::string> claim_ids;
  for (const auto& c : claims) claim_ids.insert(c.id);
  std::unordered_set<std::string> article_ids;
  for (const auto& a : articles) article_ids.insert(a.id);
  for (const auto& l : labels) {
    if (!article_ids.count(l.article_id)) {
      throw ValidationError("label references unknown article \"" + l.article_id + "\"");
    }
    if (!claim_ids.count(l.claim_id)) {
      throw ValidationError("label references unknown claim \"" + l.claim_id + "\"");
    }
  }
}

void write_claims(const std::filesystem::path& path, const std::vector<Claim>& claims) {
  auto out = open_output(path);
  for (const auto& c : claims) out << json{{"id", c.id}, {"text", c.text}}.dump() << '\n';
}

void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles) {
  auto out = open_output(path);
  for (const auto& a : articles) {
    json sentences = json::array();
    for (const auto& s : a.sentences) sentences.push_back(s.text);
    out << json{{"id", a.id}, {"source", a.source}, {"sentences", std::move(sentences)}}.dump() << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const std::vector<RelevanceLabel>& labels) {
  auto out = open_output(path);
  for (const auto& l : labels) {
    out << json{{"claim_id", l.claim_id}, {"article_id", l.article_id}, {"label", l.label}}.dump() << '\n';
  }
}

std::vector<Sentence> segment_sentences(std::string_view raw) {
  std::vector<Sentence> out;
  auto flush = [&](std::size_t begin, std::size_t end) {
    std::string text = trim(raw.substr(begin, end - begin));
    if (!text.empty()) out.push_back(Sentence{out.size(), std::move(text)});
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] == '\n') {
      flush(start, i);
      start = ++i;
    } else if (is_terminator(raw[i])) {
      while (i < raw.size() && is_terminator(raw[i])) ++i;
      flush(start, i);
      start = i;
    } else {
      ++i;
    }
  }
  flush(start, raw.size());
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto emit = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (std::isspace(c) || std::ispunct(c)) {
        emit();
      } else {
        current.push_back(static_cast<char>(std::tolower(c)));
      }
      ++i;
    } else if (std::size_t n = unicode_space_len(text, i); n > 0) {
      emit();
      i += n;
    } else {
      current.push_back(static_cast<char>(c));
      ++i;
    }
  }
  emit();
  return tokens;
}

Vocabulary::Vocabulary() {
  for (const char* s : {"[PAD]", "[CLS]", "[SEP]", "[UNK]"}) {
    index_.emplace(s, static_cast<std::int32_t>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& tok : tokenize(text)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq) kept.emplace_back(tok, n);
  }
  // counts is already lexicographic, so a stable sort on frequency keeps the tie-break.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : kept) {
    v.index_.emplace(tok, static_cast<std::int32_t>(v.tokens_.size()));
    v.freq_.emplace(tok, n);
    v.tokens_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  if (tokens.size() < static_cast<std::size_t>(kNumSpecial) ||
      !std::equal(v.tokens_.begin(), v.tokens_.end(), tokens.begin())) {
    throw ParseError("vocabulary must start with [PAD] [CLS] [SEP] [UNK]");
  }
  for (std::size_t i = kNumSpecial; i < tokens.size(); ++i) {
    if (!v.index_.emplace(tokens[i], static_cast<std::int32_t>(i)).second) {
      throw ParseError("duplicate vocabulary token \"" + tokens[i] + "\"");
    }
  }
  v.tokens_ = std::move(tokens);
  return v;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end() || it->second < kNumSpecial) return kUnk;
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const { return id(token) != kUnk; }

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw LookupError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::size_t Vocabulary::frequency(std::string_view token) const {
  auto it = freq_.find(std::string(token));
  return it == freq_.end() ? 0 : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  auto out = open_output(path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

TokenSeq tokenize_pair(std::string_view claim, std::string_view sentence, const Vocabulary& vocab,
                       std::size_t max_len) {
  return tokenize_pair(tokenize(claim), tokenize(sentence), vocab, max_len);
}

TokenSeq tokenize_pair(const std::vector<std::string>& claim_tokens,
                       const std::vector<std::string>& sentence_tokens, const Vocabulary& vocab,
                       std::size_t max_len) {
  if (max_len < 8) throw ContractError("tokenize_pair: max_len must be at least 8");
  const std::size_t budget = max_len - 3;
  std::size_t n_claim = claim_tokens.size();
  std::size_t n_sent = sentence_tokens.size();
  if (n_claim + n_sent > budget) {
    n_sent = n_claim >= budget ? 0 : budget - n_claim;
    n_claim = std::min(n_claim, budget);
  }
  TokenSeq seq;
  seq.ids.reserve(n_claim + n_sent + 3);
  seq.ids.push_back(Vocabulary::kCls);
  for (std::size_t i = 0; i < n_claim; ++i) seq.ids.push_back(vocab.id(claim_tokens[i]));
  seq.ids.push_back(Vocabulary::kSep);
  seq.segment.assign(seq.ids.size(), 0);
  for (std::size_t i = 0; i < n_sent; ++i) seq.ids.push_back(vocab.id(sentence_tokens[i]));
  seq.ids.push_back(Vocabulary::kSep);
  seq.segment.resize(seq.ids.size(), 1);
  return seq;
}

}  // namespace mtm
