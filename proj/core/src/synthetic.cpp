// SPDX-License-Identifier: Apache-2.0
#include "mtm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "mtm/error.hpp"

namespace mtm {
namespace {

struct Topic {
  std::vector<std::string> subjects;
  std::vector<std::string> verbs;
  std::vector<std::string> modifiers;
  std::vector<std::string> objects;
  std::vector<std::string> places;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> kTopics = {
      {{"doctors", "nurses", "pharmacists", "surgeons", "virologists", "dentists"},
       {"confirm", "admit", "reveal", "prove", "warn", "claim"},
       {"garlic", "lemon", "bleach", "ginger", "vinegar"},
       {"cures", "prevents", "spreads", "causes", "blocks", "reverses"},
       {"hospital", "clinic", "pharmacy", "laboratory", "ward"}},
      {{"senators", "governors", "mayors", "ministers", "councillors", "delegates"},
       {"approve", "ban", "repeal", "sign", "veto", "propose"},
       {"secret", "new", "emergency", "federal", "hidden"},
       {"taxes", "ballots", "pensions", "borders", "tariffs", "curfews"},
       {"capital", "parliament", "assembly", "statehouse", "senate"}},
      {{"farmers", "ranchers", "fishermen", "beekeepers", "growers", "herders"},
       {"lose", "burn", "dump", "sell", "hoard", "destroy"},
       {"toxic", "modified", "imported", "frozen", "rotten"},
       {"wheat", "cattle", "salmon", "honey", "potatoes", "milk"},
       {"valley", "prairie", "delta", "coast", "highlands"}},
      {{"engineers", "hackers", "programmers", "technicians", "operators", "researchers"},
       {"disable", "install", "leak", "track", "hijack", "erase"},
       {"wireless", "tiny", "invisible", "smart", "cheap"},
       {"towers", "chips", "satellites", "routers", "cameras", "phones"},
       {"datacenter", "factory", "airport", "harbor", "subway"}},
      {{"athletes", "coaches", "referees", "players", "sprinters", "boxers"},
       {"fake", "fix", "forfeit", "boycott", "rig", "cancel"},
       {"olympic", "final", "national", "annual", "charity"},
       {"matches", "medals", "trophies", "races", "tournaments", "contracts"},
       {"stadium", "arena", "velodrome", "racetrack", "gymnasium"}},
      {{"pilots", "astronauts", "sailors", "captains", "drivers", "conductors"},
       {"spot", "film", "crash", "abandon", "steer", "chase"},
       {"glowing", "giant", "silent", "unmarked", "burning"},
       {"lights", "ships", "drones", "trains", "balloons", "jets"},
       {"desert", "ocean", "mountains", "glacier", "canyon"}},
      {{"teachers", "students", "principals", "professors", "tutors", "librarians"},
       {"remove", "rewrite", "forbid", "require", "grade", "burn"},
       {"banned", "foreign", "religious", "classic", "digital"},
       {"textbooks", "exams", "uniforms", "lessons", "diplomas", "novels"},
       {"school", "university", "academy", "college", "kindergarten"}},
      {{"bankers", "investors", "traders", "economists", "lenders", "auditors"},
       {"freeze", "print", "steal", "inflate", "seize", "hide"},
       {"offshore", "digital", "gold", "foreign", "private"},
       {"savings", "coins", "accounts", "loans", "bonds", "salaries"},
       {"exchange", "treasury", "vault", "bank", "market"}},
  };
  return kTopics;
}

const std::vector<std::string>& times() {
  static const std::vector<std::string> kTimes = {"yesterday", "today", "overnight", "recently",
                                                  "secretly", "again", "twice", "publicly"};
  return kTimes;
}

// Filler vocabulary for sentences that carry no claim-specific signal.
const std::vector<std::string>& filler_subjects() {
  static const std::vector<std::string> k = {"officials", "residents", "analysts", "witnesses", "reporters",
                                             "spokespeople", "neighbours", "volunteers", "critics", "locals"};
  return k;
}
const std::vector<std::string>& filler_verbs() {
  static const std::vector<std::string> k = {"described", "discussed", "noted", "mentioned", "reviewed",
                                             "questioned", "summarised", "compared", "recorded", "observed"};
  return k;
}
const std::vector<std::string>& filler_objects() {
  static const std::vector<std::string> k = {"the weather", "several meetings", "local budgets", "the schedule",
                                             "older reports", "traffic delays", "community events",
                                             "public records", "the timeline", "earlier statements"};
  return k;
}
const std::vector<std::string>& filler_tails() {
  static const std::vector<std::string> k = {"during the week", "on local radio", "in a short interview",
                                             "without further detail", "at a press briefing",
                                             "in the morning", "after the weekend", "in written remarks"};
  return k;
}
const std::vector<std::string>& quote_prefixes() {
  static const std::vector<std::string> k = {"a post reads", "one message said", "the caption stated",
                                             "a widely forwarded text says", "the video description reads"};
  return k;
}
const std::vector<std::string>& quote_suffixes() {
  static const std::vector<std::string> k = {"according to the post", "in all capitals", "with no source",
                                             "next to a blurry photo", "alongside several emojis"};
  return k;
}

// One template-filled event: subject verb modifier object at place time.
struct Event {
  std::size_t topic = 0;
  std::size_t slot[5] = {0, 0, 0, 0, 0};  // subject, verb, modifier, object, place
  std::size_t time = 0;

  bool operator<(const Event& o) const {
    return std::tie(topic, slot[0], slot[1], slot[2], slot[3], slot[4], time) <
           std::tie(o.topic, o.slot[0], o.slot[1], o.slot[2], o.slot[3], o.slot[4], o.time);
  }
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t range(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

std::size_t pool_size(const Topic& t, std::size_t slot) {
  switch (slot) {
    case 0: return t.subjects.size();
    case 1: return t.verbs.size();
    case 2: return t.modifiers.size();
    case 3: return t.objects.size();
    default: return t.places.size();
  }
}

const std::string& slot_word(const Event& e, std::size_t slot) {
  const Topic& t = topics()[e.topic];
  switch (slot) {
    case 0: return t.subjects[e.slot[0]];
    case 1: return t.verbs[e.slot[1]];
    case 2: return t.modifiers[e.slot[2]];
    case 3: return t.objects[e.slot[3]];
    default: return t.places[e.slot[4]];
  }
}

std::vector<std::string> event_tokens(const Event& e) {
  return {slot_word(e, 0), slot_word(e, 1), slot_word(e, 2), slot_word(e, 3),
          "at",            "the",           slot_word(e, 4), times()[e.time]};
}

std::string join(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

Event random_event(Gen& g, std::size_t topic) {
  Event e;
  e.topic = topic;
  const Topic& t = topics()[topic];
  for (std::size_t s = 0; s < 5; ++s) e.slot[s] = g.index(pool_size(t, s));
  e.time = g.index(times().size());
  return e;
}

Event sibling_of(Gen& g, const Event& base, std::size_t changes) {
  Event e = base;
  std::vector<std::size_t> slots(5);
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), g.rng());
  const Topic& t = topics()[base.topic];
  for (std::size_t i = 0; i < std::min<std::size_t>(changes, 5); ++i) {
    const std::size_t s = slots[i];
    const std::size_t n = pool_size(t, s);
    e.slot[s] = (base.slot[s] + 1 + g.index(n - 1)) % n;
  }
  e.time = g.index(times().size());
  return e;
}

std::string filler_sentence(Gen& g, const Event& e, double mention_rate) {
  std::string s = g.pick(filler_subjects()) + " " + g.pick(filler_verbs()) + " " + g.pick(filler_objects());
  if (g.chance(mention_rate)) s += " about " + slot_word(e, g.index(5));
  if (g.chance(mention_rate)) s += " and " + slot_word(e, g.index(5));
  s += " " + g.pick(filler_tails()) + ".";
  return s;
}

std::string quote_sentence(Gen& g, const std::vector<std::string>& claim, double min_fraction,
                           double max_fraction) {
  const std::size_t n = claim.size();
  const auto need = std::min(n, static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(n) - 1e-9)));
  const auto most = std::clamp(static_cast<std::size_t>(std::floor(max_fraction * static_cast<double>(n) + 1e-9)),
                               need, n);
  const std::size_t len = g.range(need, most);
  const std::size_t start = g.index(n - len + 1);
  return g.pick(quote_prefixes()) + " " + join(claim, start, start + len) + " " + g.pick(quote_suffixes()) + ".";
}

std::string pattern_sentence(Gen& g, const Event& e) {
  return "the story about " + slot_word(e, 0) + " and " + slot_word(e, 3) + " " + g.pick(pattern_phrases()) + ".";
}

std::size_t longest_common_run(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t n = 0;
      while (i + n < a.size() && j + n < b.size() && a[i + n] == b[j + n]) ++n;
      best = std::max(best, n);
    }
  }
  return best;
}

struct Draft {
  std::vector<std::string> sentences;
  std::size_t quote_index = 0;
  std::size_t pattern_index = 0;
};

// Quote (when present) and pattern sentences at distinct random positions among the fillers.
// Relevant articles quote their event; decoys only carry the debunking
// sentence among fillers.
Draft draft_article(Gen& g, const Event& e, std::size_t n_fillers, const SyntheticConfig& config,
                    double mention_rate, bool with_quote) {
  const std::vector<std::string> tokens = event_tokens(e);
  std::vector<std::string> body;
  for (std::size_t i = 0; i < n_fillers; ++i) body.push_back(filler_sentence(g, e, mention_rate));
  const std::size_t total = n_fillers + 2;
  Draft d;
  d.quote_index = g.index(total);
  do {
    d.pattern_index = g.index(total);
  } while (d.pattern_index == d.quote_index);
  std::size_t next = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (i == d.quote_index) {
      d.sentences.push_back(!with_quote ? filler_sentence(g, e, mention_rate) : quote_sentence(g, tokens, config.min_quote_fraction, config.max_quote_fraction));
    } else if (i == d.pattern_index) {
      d.sentences.push_back(pattern_sentence(g, e));
    } else {
      d.sentences.push_back(body[next++]);
    }
  }
  return d;
}

std::string padded(const char* prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

const std::vector<std::string>& pattern_phrases() {
  static const std::vector<std::string> k = {
      "has been debunked by fact checkers", "went viral on messaging apps",
      "is a hoax according to experts",    "was shared thousands of times online",
      "has no basis in any evidence",      "resurfaced in social media feeds",
      "was rated false by reviewers",      "circulated in chain messages",
  };
  return k;
}

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_claims, std::size_t n_articles,
                                          const SyntheticConfig& config) {
  if (n_claims == 0) throw ConfigError("synthetic: n_claims must be positive");
  if (n_articles < n_claims) throw ConfigError("synthetic: n_articles must be at least n_claims");
  if (config.min_distractors > config.max_distractors ||
      config.decoy_min_distractors > config.decoy_max_distractors) {
    throw ConfigError("synthetic: distractor range is empty");
  }
  if (!(config.min_quote_fraction > 0.0 && config.min_quote_fraction <= config.max_quote_fraction &&
        config.max_quote_fraction <= 1.0)) {
    throw ConfigError("synthetic: quote fractions must satisfy 0 < min <= max <= 1");
  }
  Gen g(seed);
  const std::size_t n_topics = topics().size();

  // Distinct claim events, spread round-robin over topics.
  std::set<Event> used;
  std::vector<Event> events;
  events.reserve(n_claims);
  // A quote of one claim must not also quote another.
  const std::size_t quote_run = static_cast<std::size_t>(
      std::ceil(config.min_quote_fraction * static_cast<double>(event_tokens(Event{}).size()) - 1e-9));
  std::vector<std::vector<std::string>> claim_tokens;
  for (std::size_t i = 0; i < n_claims; ++i) {
    Event e;
    std::vector<std::string> tokens;
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == 10000) throw ConfigError("synthetic: too many claims for the template pools");
      e = random_event(g, i % n_topics);
      if (used.count(e) != 0) continue;
      tokens = event_tokens(e);
      const bool clash = std::any_of(claim_tokens.begin(), claim_tokens.end(), [&](const auto& other) {
        return longest_common_run(tokens, other) >= quote_run;
      });
      if (!clash) break;
    }
    used.insert(e);
    events.push_back(e);
    claim_tokens.push_back(std::move(tokens));
  }

  struct Pending {
    Draft draft;
    std::string source;
    std::size_t claim = 0;
    bool relevant = false;
  };
  static const std::vector<std::string> kSources = {"factcheck-desk", "verify-wire", "rumor-watch", "truth-meter"};
  std::vector<Pending> pending;
  pending.reserve(n_articles);
  for (std::size_t i = 0; i < n_claims; ++i) {
    const std::size_t n = g.range(config.min_distractors, config.max_distractors);
    pending.push_back({draft_article(g, events[i], n, config, config.topic_mention_rate, true),
                       g.pick(kSources), i, true});
  }
  // Decoys fact-check sibling events of the claims, cycling through claims.
  for (std::size_t j = 0; pending.size() < n_articles; ++j) {
    const std::size_t owner = j % n_claims;
    Event sib;
    do {
      sib = sibling_of(g, events[owner], config.sibling_changes);
    } while (used.count(sib) != 0);
    const std::size_t n = g.range(config.decoy_min_distractors, config.decoy_max_distractors);
    pending.push_back({draft_article(g, sib, n, config, config.decoy_mention_rate, false),
                       g.pick(kSources), owner, false});
  }
  std::shuffle(pending.begin(), pending.end(), g.rng());

  SyntheticCorpus out;
  const std::size_t id_width = std::max<std::size_t>(4, std::to_string(n_articles).size());
  const std::size_t claim_width = std::max<std::size_t>(4, std::to_string(n_claims).size());
  for (std::size_t i = 0; i < n_claims; ++i) {
    const auto tokens = event_tokens(events[i]);
    out.claims.push_back({padded("c", i, claim_width), join(tokens, 0, tokens.size())});
  }
  out.planted.resize(n_claims);
  for (std::size_t a = 0; a < pending.size(); ++a) {
    Article art;
    art.id = padded("a", a, id_width);
    art.source = pending[a].source;
    for (std::size_t s = 0; s < pending[a].draft.sentences.size(); ++s) {
      art.sentences.push_back({s, pending[a].draft.sentences[s]});
    }
    if (pending[a].relevant) {
      const std::size_t c = pending[a].claim;
      out.labels.push_back({out.claims[c].id, art.id, 1});
      out.planted[c] = {out.claims[c].id, art.id, pending[a].draft.quote_index, pending[a].draft.pattern_index};
    }
    out.articles.push_back(std::move(art));
  }
  std::sort(out.labels.begin(), out.labels.end(),
            [](const RelevanceLabel& x, const RelevanceLabel& y) { return x.claim_id < y.claim_id; });
  return out;
}

}  // namespace mtm
