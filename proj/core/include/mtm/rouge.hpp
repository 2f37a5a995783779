// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mtm {

using Bigram = std::pair<std::string, std::string>;
using BigramCounts = std::map<Bigram, std::size_t>;

/// ROUGE-2 of a candidate against a reference, both in [0, 1].
struct RougeTarget {
  double precision = 0.0;
  double recall = 0.0;
};

/// Adjacent token pairs with multiplicity.
BigramCounts bigram_multiset(const std::vector<std::string>& tokens);

/// Clipped bigram overlap size.
std::size_t bigram_overlap(const BigramCounts& a, const BigramCounts& b);

/// q is the reference and s the candidate. A side with fewer than two
/// tokens has no bigrams and its ratio is 0.
RougeTarget rouge2(const std::vector<std::string>& q_tokens,
                   const std::vector<std::string>& s_tokens);

}  // namespace mtm
