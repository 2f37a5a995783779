// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mtm {

using Vec = std::vector<double>;

double l2(const Vec& v);
double distance(const Vec& a, const Vec& b);

/// Sentence embedding minus claim embedding for one (claim, sentence) pair.
struct ResidualRecord {
  std::string claim_id;
  std::string article_id;
  std::size_t sentence_index = 0;
  Vec r;
  double norm = 0.0;
};

/// r = s - q.
Vec residual(const Vec& q_vec, const Vec& s_vec);
ResidualRecord make_residual_record(std::string claim_id, std::string article_id,
                                    std::size_t sentence_index, const Vec& q_vec, const Vec& s_vec);

/// Keeps records with t_low < norm < t_high, in order.
std::vector<ResidualRecord> filter_valid(const std::vector<ResidualRecord>& records, double t_low,
                                         double t_high);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
std::pair<double, double> compute_thresholds(const std::vector<ResidualRecord>& records, double q_low,
                                             double q_high);

struct KMeansResult {
  std::vector<Vec> centroids;
  std::vector<std::size_t> assignment;
  /// Inertia after each assignment step.
  std::vector<double> inertia;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Stops at an assignment fixpoint
/// or after max_iter iterations. An empty cluster takes the point farthest
/// from its current centroid.
KMeansResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

struct MemoryBank {
  std::vector<Vec> patterns;
  std::size_t epoch = 0;

  std::size_t size() const { return patterns.size(); }
  std::size_t dim() const { return patterns.empty() ? 0 : patterns.front().size(); }
};

/// K-means over the valid residuals; the centroids become the patterns.
MemoryBank init_memory(const std::vector<ResidualRecord>& valid, std::size_t k, std::uint64_t seed);

/// K Gaussian vectors whose norms match the mean residual norm.
MemoryBank random_memory(const std::vector<ResidualRecord>& records, std::size_t k, std::uint64_t seed);

struct NearestPattern {
  std::size_t index = 0;
  double distance = std::numeric_limits<double>::infinity();
};

/// Lowest index wins ties.
NearestPattern nearest_pattern(const Vec& r, const MemoryBank& bank);

struct WeightedResidual {
  Vec r;
  double weight = 0.0;
};

struct PatternUpdate {
  Vec m_new;
  Vec u_right;    // weighted sum over rightly predicted residuals
  Vec u_wrong;    // weighted sum over wrongly predicted residuals
  Vec direction;  // w_r (u_right - m) + w_w (m - u_wrong)
  double w_right = 0.0;
  double w_wrong = 0.0;
  bool moved = false;
};

/// Draws m towards rightly predicted residuals and away from wrongly
/// predicted ones with a step of length lambda_m * ||m||. A zero total
/// weight or a vanishing direction leaves m unchanged.
PatternUpdate update_pattern(const Vec& m_old, const std::vector<WeightedResidual>& right,
                             const std::vector<WeightedResidual>& wrong, double lambda_m);

struct FeedbackEntry {
  ResidualRecord record;
  double weight = 0.0;  // |y_hat - 0.5|
};

/// Per-pattern feedback collected over one epoch.
class FeedbackLedger {
 public:
  explicit FeedbackLedger(std::size_t k = 0) : right_(k), wrong_(k) {}

  void reset(std::size_t k);
  void record(std::size_t pattern, FeedbackEntry entry, bool right);
  const std::vector<FeedbackEntry>& right(std::size_t pattern) const { return right_.at(pattern); }
  const std::vector<FeedbackEntry>& wrong(std::size_t pattern) const { return wrong_.at(pattern); }
  std::size_t patterns() const { return right_.size(); }
  std::size_t total() const;
  bool empty() const { return total() == 0; }
  void clear();

 private:
  std::vector<std::vector<FeedbackEntry>> right_;
  std::vector<std::vector<FeedbackEntry>> wrong_;
};

/// Applies update_pattern to every pattern with feedback, bumps the epoch
/// counter and clears the ledger.
MemoryBank epoch_update(const MemoryBank& bank, FeedbackLedger& ledger, double lambda_m);

}  // namespace mtm
