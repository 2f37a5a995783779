// SPDX-License-Identifier: Apache-2.0
#include "mtm/memory.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mtm/error.hpp"
#include "mtm/log.hpp"

namespace mtm {
namespace {

double squared_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_same_dim(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(op, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

std::size_t nearest_centroid(const Vec& p, const std::vector<Vec>& centroids) {
  std::size_t best = 0;
  double best_d = squared_distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Vec> kmeans_plus_plus(const std::vector<Vec>& points, std::size_t k, std::mt19937_64& rng) {
  std::vector<Vec> centroids;
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  centroids.push_back(points[pick(rng)]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (d2[i] <= 0.0) continue;
        if (target < d2[i]) {
          chosen = i;
          break;
        }
        target -= d2[i];
      }
    } else {
      chosen = pick(rng);
    }
    centroids.push_back(points[chosen]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

}  // namespace

double l2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "distance");
  return std::sqrt(squared_distance(a, b));
}

Vec residual(const Vec& q_vec, const Vec& s_vec) {
  check_same_dim(q_vec, s_vec, "residual");
  Vec r(s_vec.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s_vec[i] - q_vec[i];
  return r;
}

ResidualRecord make_residual_record(std::string claim_id, std::string article_id,
                                    std::size_t sentence_index, const Vec& q_vec, const Vec& s_vec) {
  ResidualRecord rec{std::move(claim_id), std::move(article_id), sentence_index, residual(q_vec, s_vec), 0.0};
  rec.norm = l2(rec.r);
  return rec;
}

std::vector<ResidualRecord> filter_valid(const std::vector<ResidualRecord>& records, double t_low,
                                         double t_high) {
  if (!(t_low < t_high)) {
    throw ConfigError("filter_valid: t_low (" + std::to_string(t_low) + ") must be below t_high (" +
                      std::to_string(t_high) + ")");
  }
  std::vector<ResidualRecord> out;
  for (const auto& rec : records) {
    if (rec.norm > t_low && rec.norm < t_high) out.push_back(rec);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw ContractError("quantile: level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> compute_thresholds(const std::vector<ResidualRecord>& records, double q_low,
                                             double q_high) {
  if (records.empty()) throw ContractError("compute_thresholds: no residuals");
  if (!(0.0 <= q_low && q_low < q_high && q_high <= 1.0)) {
    throw ConfigError("compute_thresholds: need 0 <= q_low < q_high <= 1");
  }
  std::vector<double> norms;
  norms.reserve(records.size());
  for (const auto& r : records) norms.push_back(r.norm);
  return {quantile(norms, q_low), quantile(std::move(norms), q_high)};
}

KMeansResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (points.size() < k) {
    throw ConfigError("kmeans: " + std::to_string(points.size()) + " points cannot form " + std::to_string(k) +
                      " clusters");
  }
  for (const auto& p : points) check_same_dim(points[0], p, "kmeans");
  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = kmeans_plus_plus(points, k, rng);
  const std::size_t dim = points[0].size();
  std::vector<std::size_t> previous;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    res.assignment.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) res.assignment[i] = nearest_centroid(points[i], res.centroids);

    std::vector<std::size_t> counts(k, 0);
    for (auto a : res.assignment) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = points.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (counts[res.assignment[i]] < 2) continue;
        const double d = squared_distance(points[i], res.centroids[res.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == points.size()) continue;
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      counts[c] = 1;
      res.centroids[c] = points[far];
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += squared_distance(points[i], res.centroids[res.assignment[i]]);
    }
    res.inertia.push_back(inertia);
    res.iterations = iter + 1;
    if (res.assignment == previous) break;
    previous = res.assignment;

    std::vector<Vec> sums(k, Vec(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[res.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) s[j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return res;
}

MemoryBank init_memory(const std::vector<ResidualRecord>& valid, std::size_t k, std::uint64_t seed) {
  if (valid.size() < k) {
    throw ConfigError("init_memory: only " + std::to_string(valid.size()) + " valid residuals for K=" +
                      std::to_string(k) + "; lower K or widen the threshold band");
  }
  std::vector<Vec> points;
  points.reserve(valid.size());
  for (const auto& rec : valid) points.push_back(rec.r);
  MemoryBank bank;
  bank.patterns = kmeans(points, k, seed).centroids;
  for (const auto& m : bank.patterns) {
    if (l2(m) == 0.0) log::warning("init_memory: a pattern vector is all zeros");
  }
  return bank;
}

MemoryBank random_memory(const std::vector<ResidualRecord>& records, std::size_t k, std::uint64_t seed) {
  if (records.empty()) throw ConfigError("random_memory: no residuals to size the patterns");
  double mean_norm = 0.0;
  for (const auto& r : records) mean_norm += r.norm;
  mean_norm /= static_cast<double>(records.size());
  if (mean_norm <= 0.0) mean_norm = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MemoryBank bank;
  for (std::size_t i = 0; i < k; ++i) {
    Vec m(records.front().r.size());
    for (auto& v : m) v = normal(rng);
    const double n = l2(m);
    for (auto& v : m) v *= mean_norm / n;
    bank.patterns.push_back(std::move(m));
  }
  return bank;
}

NearestPattern nearest_pattern(const Vec& r, const MemoryBank& bank) {
  if (bank.patterns.empty()) throw ContractError("nearest_pattern: memory bank is empty");
  NearestPattern best;
  for (std::size_t i = 0; i < bank.patterns.size(); ++i) {
    const double d = distance(bank.patterns[i], r);
    if (d < best.distance) best = {i, d};
  }
  return best;
}

PatternUpdate update_pattern(const Vec& m_old, const std::vector<WeightedResidual>& right,
                             const std::vector<WeightedResidual>& wrong, double lambda_m) {
  const std::size_t dim = m_old.size();
  PatternUpdate up;
  up.m_new = m_old;
  up.u_right.assign(dim, 0.0);
  up.u_wrong.assign(dim, 0.0);
  up.direction.assign(dim, 0.0);
  double sum_right = 0.0, sum_wrong = 0.0;
  for (const auto& e : right) {
    check_same_dim(m_old, e.r, "update_pattern");
    sum_right += e.weight;
    for (std::size_t j = 0; j < dim; ++j) up.u_right[j] += e.weight * e.r[j];
  }
  for (const auto& e : wrong) {
    check_same_dim(m_old, e.r, "update_pattern");
    sum_wrong += e.weight;
    for (std::size_t j = 0; j < dim; ++j) up.u_wrong[j] += e.weight * e.r[j];
  }
  const double total = sum_right + sum_wrong;
  if (total <= 0.0) {
    log::debug("update_pattern: all feedback weights are zero; pattern left unchanged");
    return up;
  }
  up.w_right = sum_right / total;
  up.w_wrong = 1.0 - up.w_right;
  for (std::size_t j = 0; j < dim; ++j) {
    up.direction[j] = up.w_right * (up.u_right[j] - m_old[j]) + up.w_wrong * (m_old[j] - up.u_wrong[j]);
  }
  const double dir_norm = l2(up.direction);
  if (dir_norm < 1e-12) return up;
  const double step = lambda_m * l2(m_old) / dir_norm;
  for (std::size_t j = 0; j < dim; ++j) up.m_new[j] = m_old[j] + step * up.direction[j];
  up.moved = step != 0.0;
  return up;
}

void FeedbackLedger::reset(std::size_t k) {
  right_.assign(k, {});
  wrong_.assign(k, {});
}

void FeedbackLedger::record(std::size_t pattern, FeedbackEntry entry, bool right) {
  if (pattern >= right_.size()) throw LookupError("feedback for unknown pattern " + std::to_string(pattern));
  (right ? right_ : wrong_)[pattern].push_back(std::move(entry));
}

std::size_t FeedbackLedger::total() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < right_.size(); ++i) n += right_[i].size() + wrong_[i].size();
  return n;
}

void FeedbackLedger::clear() {
  for (auto& v : right_) v.clear();
  for (auto& v : wrong_) v.clear();
}

MemoryBank epoch_update(const MemoryBank& bank, FeedbackLedger& ledger, double lambda_m) {
  MemoryBank next = bank;
  const std::size_t k = std::min(bank.size(), ledger.patterns());
  for (std::size_t i = 0; i < k; ++i) {
    if (ledger.right(i).empty() && ledger.wrong(i).empty()) continue;
    std::vector<WeightedResidual> right, wrong;
    for (const auto& e : ledger.right(i)) right.push_back({e.record.r, e.weight});
    for (const auto& e : ledger.wrong(i)) wrong.push_back({e.record.r, e.weight});
    next.patterns[i] = update_pattern(bank.patterns[i], right, wrong, lambda_m).m_new;
  }
  ++next.epoch;
  ledger.clear();
  return next;
}

}  // namespace mtm
