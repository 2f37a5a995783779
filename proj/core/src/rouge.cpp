// SPDX-License-Identifier: Apache-2.0
#include "mtm/rouge.hpp"

#include <algorithm>

namespace mtm {

BigramCounts bigram_multiset(const std::vector<std::string>& tokens) {
  BigramCounts counts;
  for (std::size_t i = 1; i < tokens.size(); ++i) ++counts[{tokens[i - 1], tokens[i]}];
  return counts;
}

std::size_t bigram_overlap(const BigramCounts& a, const BigramCounts& b) {
  std::size_t overlap = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      overlap += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return overlap;
}

RougeTarget rouge2(const std::vector<std::string>& q_tokens, const std::vector<std::string>& s_tokens) {
  const std::size_t n_q = q_tokens.size() < 2 ? 0 : q_tokens.size() - 1;
  const std::size_t n_s = s_tokens.size() < 2 ? 0 : s_tokens.size() - 1;
  if (n_q == 0 && n_s == 0) return {};
  const double overlap =
      static_cast<double>(bigram_overlap(bigram_multiset(q_tokens), bigram_multiset(s_tokens)));
  RougeTarget r;
  if (n_s > 0) r.precision = overlap / static_cast<double>(n_s);
  if (n_q > 0) r.recall = overlap / static_cast<double>(n_q);
  return r;
}

}  // namespace mtm
