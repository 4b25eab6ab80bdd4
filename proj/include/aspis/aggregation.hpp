#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aspis/assignment.hpp"
#include "aspis/detection.hpp"
#include "aspis/report.hpp"

namespace aspis {

/// Raised when a robust aggregator's population bound is not met.
class InapplicableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct AggregationResult {
  /// Update direction (already normalized; the model moves by -rate * gradient).
  Vector gradient;
  /// Files whose contribution was a distorted value, or that were dropped.
  std::set<FileId> corrupted_files;
  /// Files that contributed to the update.
  std::set<FileId> used_files;
};

namespace detail {

inline std::size_t common_dim(std::span<const Vector> vs, const char* what) {
  if (vs.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  const std::size_t d = vs.front().size();
  for (const auto& v : vs)
    if (v.size() != d) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  return d;
}

inline Vector mean_of(std::span<const Vector> vs) {
  const std::size_t d = common_dim(vs, "mean");
  Vector out(d, 0.0);
  for (const auto& v : vs)
    for (std::size_t k = 0; k < d; ++k) out[k] += v[k];
  for (auto& x : out) x /= static_cast<double>(vs.size());
  return out;
}

inline double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace detail

/// Value held by at least r' of the inputs. Without such a majority the most
/// frequent value wins, ties broken by byte order (smallest first).
inline Vector majority_vote(std::span<const Vector> values, double tol = 0.0) {
  detail::common_dim(values, "majority_vote");
  std::vector<std::size_t> reps;    // index of first member of each class
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    bool placed = false;
    for (std::size_t c = 0; c < reps.size() && !placed; ++c) {
      if (same_value(values[reps[c]], values[i], tol)) {
        ++counts[c];
        placed = true;
      }
    }
    if (!placed) {
      reps.push_back(i);
      counts.push_back(1);
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < reps.size(); ++c) {
    if (counts[c] > counts[best] ||
        (counts[c] == counts[best] && byte_order_less(values[reps[c]], values[reps[best]])))
      best = c;
  }
  return values[reps[best]];
}

/// Per-coordinate median; an even count averages the two middle values.
inline Vector coordinate_median(std::span<const Vector> vectors) {
  const std::size_t d = detail::common_dim(vectors, "coordinate_median");
  const std::size_t n = vectors.size();
  Vector out(d);
  std::vector<double> col(n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vectors[i][k];
    std::sort(col.begin(), col.end());
    out[k] = n % 2 == 1 ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
  }
  return out;
}

/// Coordinate-wise median of the means of consecutive groups of group_size.
inline Vector median_of_means(std::span<const Vector> vectors, std::size_t group_size) {
  detail::common_dim(vectors, "median_of_means");
  if (group_size == 0 || vectors.size() % group_size != 0)
    throw std::invalid_argument("median_of_means: group size " + std::to_string(group_size) +
                                " does not divide " + std::to_string(vectors.size()));
  std::vector<Vector> means;
  for (std::size_t g = 0; g < vectors.size(); g += group_size)
    means.push_back(detail::mean_of(vectors.subspan(g, group_size)));
  return coordinate_median(means);
}

namespace detail {

// Krum score of each vector in `pool`: sum of squared distances to its
// max(n - q - 2, 0) nearest neighbours within the pool.
inline std::vector<double> krum_scores(const std::vector<const Vector*>& pool, int q) {
  const std::size_t n = pool.size();
  const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - q - 2, 0));
  std::vector<double> scores(n, 0.0);
  std::vector<double> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dist.push_back(squared_distance(*pool[i], *pool[j]));
    std::sort(dist.begin(), dist.end());
    scores[i] = std::accumulate(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(std::min(k, dist.size())), 0.0);
  }
  return scores;
}

// Indices of the m lowest scores; ties go to the lower index.
inline std::vector<std::size_t> lowest(const std::vector<double>& scores, std::size_t m) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  idx.resize(m);
  return idx;
}

}  // namespace detail

/// Multi-Krum: score = sum of squared distances to the K - q - 2 nearest
/// neighbours; returns the mean of the m lowest-scoring vectors (m = 1 is Krum).
/// Requires K >= 2q + 3.
inline Vector multi_krum(std::span<const Vector> vectors, int q, std::size_t m) {
  detail::common_dim(vectors, "multi_krum");
  const auto K = static_cast<int>(vectors.size());
  if (q < 0) throw std::invalid_argument("multi_krum: q must be non-negative");
  if (K < 2 * q + 3)
    throw InapplicableError("multi_krum needs at least 2q+3 = " + std::to_string(2 * q + 3) + " inputs, got " +
                            std::to_string(K));
  if (m < 1 || m > static_cast<std::size_t>(K - q))
    throw std::invalid_argument("multi_krum: m must lie in [1, K - q]");
  std::vector<const Vector*> pool;
  for (const auto& v : vectors) pool.push_back(&v);
  const auto pick = detail::lowest(detail::krum_scores(pool, q), m);
  std::vector<Vector> chosen;
  for (auto i : pick) chosen.push_back(vectors[i]);
  return detail::mean_of(chosen);
}

/// Bulyan: theta = K - 2q vectors are selected by repeatedly running Krum on
/// the remaining pool; then, per coordinate, the beta = theta - 2q selected
/// values closest to the coordinate median are averaged. Requires K >= 4q + 3.
inline Vector bulyan(std::span<const Vector> vectors, int q) {
  const std::size_t d = detail::common_dim(vectors, "bulyan");
  const auto K = static_cast<int>(vectors.size());
  if (q < 0) throw std::invalid_argument("bulyan: q must be non-negative");
  if (K < 4 * q + 3)
    throw InapplicableError("bulyan needs at least 4q+3 = " + std::to_string(4 * q + 3) + " inputs, got " +
                            std::to_string(K));
  const auto theta = static_cast<std::size_t>(K - 2 * q);
  const auto beta = theta - 2 * static_cast<std::size_t>(q);

  std::vector<const Vector*> pool;
  for (const auto& v : vectors) pool.push_back(&v);
  std::vector<const Vector*> selected;
  while (selected.size() < theta) {
    const auto best = detail::lowest(detail::krum_scores(pool, q), 1).front();
    selected.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }

  Vector out(d);
  std::vector<double> col(theta);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < theta; ++i) col[i] = (*selected[i])[k];
    std::sort(col.begin(), col.end());
    const double med = theta % 2 == 1 ? col[theta / 2] : (col[theta / 2 - 1] + col[theta / 2]) / 2.0;
    std::stable_sort(col.begin(), col.end(),
                     [med](double a, double b) { return std::fabs(a - med) < std::fabs(b - med); });
    double s = 0.0;
    for (std::size_t i = 0; i < beta; ++i) s += col[i];
    out[k] = s / static_cast<double>(beta);
  }
  return out;
}

/// Aggregation after detection.
///
/// Detected: each file held by at least one detected-honest worker
/// contributes the value of its lowest-labelled such worker; the update is
/// the mean of those values. Files without a detected-honest worker are
/// dropped and counted as corrupted.
///
/// Ambiguous: per-file majority vote, then coordinate-wise median of the f
/// winners. With ground truth present, a file is corrupted when its winner
/// differs from the true gradient.
inline AggregationResult aspis_aggregate(const WorkerReport& report, const Assignment& a,
                                         const DetectionOutcome& outcome, double tol = 0.0) {
  report.check_complete(a);
  AggregationResult res;
  const bool truth = report.has_truth();
  const std::uint64_t f = a.file_count();

  if (const auto* det = std::get_if<Detected>(&outcome)) {
    std::vector<Vector> chosen;
    for (FileId i = 0; i < f; ++i) {
      const auto& members = a.workers_of(i);
      auto it = std::find_if(members.begin(), members.end(), [&](Worker j) {
        return std::binary_search(det->honest.begin(), det->honest.end(), j);
      });
      if (it == members.end()) {
        res.corrupted_files.insert(i);
        continue;
      }
      const Vector& v = report.value(a, *it, i);
      if (truth && !same_value(v, report.truth()[i], tol)) res.corrupted_files.insert(i);
      res.used_files.insert(i);
      chosen.push_back(v);
    }
    res.gradient = chosen.empty() ? Vector(report.dim(), 0.0) : detail::mean_of(chosen);
    return res;
  }

  std::vector<Vector> winners;
  winners.reserve(f);
  std::vector<Vector> copies;
  for (FileId i = 0; i < f; ++i) {
    copies.clear();
    for (Worker j : a.workers_of(i)) copies.push_back(report.value(a, j, i));
    winners.push_back(majority_vote(copies, tol));
    if (truth && !same_value(winners.back(), report.truth()[i], tol)) res.corrupted_files.insert(i);
    res.used_files.insert(i);
  }
  res.gradient = coordinate_median(winners);
  return res;
}

/// Group-replication aggregation: majority vote inside each group, then
/// median-of-means over the group winners (group_size = 1 is the plain
/// coordinate-wise median). Expects the group layout.
inline AggregationResult detox_aggregate(const WorkerReport& report, const Assignment& a, std::size_t group_size = 1,
                                         double tol = 0.0) {
  if (a.layout() != Layout::Groups) throw std::invalid_argument("detox_aggregate: group layout required");
  report.check_complete(a);
  AggregationResult res;
  std::vector<Vector> winners;
  std::vector<Vector> copies;
  for (FileId i = 0; i < a.file_count(); ++i) {
    copies.clear();
    for (Worker j : a.workers_of(i)) copies.push_back(report.value(a, j, i));
    winners.push_back(majority_vote(copies, tol));
    if (report.has_truth() && !same_value(winners.back(), report.truth()[i], tol)) res.corrupted_files.insert(i);
    res.used_files.insert(i);
  }
  res.gradient = median_of_means(winners, group_size);
  return res;
}

enum class Aggregator { Aspis, BaselineMedian, MedianOfMeans, MultiKrum, Bulyan, DetoxMoM };

inline const char* to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Aspis: return "aspis";
    case Aggregator::BaselineMedian: return "baseline-median";
    case Aggregator::MedianOfMeans: return "median-of-means";
    case Aggregator::MultiKrum: return "multi-krum";
    case Aggregator::Bulyan: return "bulyan";
    case Aggregator::DetoxMoM: return "detox-mom";
  }
  return "?";
}

inline Aggregator parse_aggregator(const std::string& name) {
  for (auto a : {Aggregator::Aspis, Aggregator::BaselineMedian, Aggregator::MedianOfMeans, Aggregator::MultiKrum,
                 Aggregator::Bulyan, Aggregator::DetoxMoM})
    if (name == to_string(a)) return a;
  throw std::invalid_argument("unknown aggregator '" + name +
                              "' (expected aspis, baseline-median, median-of-means, multi-krum, bulyan or detox-mom)");
}

/// File layout each aggregator runs on.
inline Layout layout_for(Aggregator a) {
  switch (a) {
    case Aggregator::Aspis: return Layout::Subset;
    case Aggregator::DetoxMoM: return Layout::Groups;
    default: return Layout::PerWorker;
  }
}

inline Assignment make_assignment(Aggregator agg, const ClusterParams& params) {
  switch (layout_for(agg)) {
    case Layout::Subset: return Assignment::subset(params);
    case Layout::Groups: return Assignment::groups(params);
    case Layout::PerWorker: return Assignment::per_worker(params);
  }
  throw std::logic_error("unreachable");
}

struct AggregatorOptions {
  std::size_t mom_group_size = 1;  ///< median-of-means / detox second stage
  std::size_t krum_m = 1;          ///< multi-krum selection count
  double tol = 0.0;                ///< equality slack for votes and detection
};

/// Runs one of the non-Aspis aggregators on a report laid out by
/// make_assignment. Corruption accounting: for the per-worker layout every
/// distorted input counts; for the group layout every distorted group winner.
inline AggregationResult baseline_aggregate(Aggregator agg, const WorkerReport& report, const Assignment& a,
                                            const AggregatorOptions& opt = {}) {
  if (agg == Aggregator::DetoxMoM) return detox_aggregate(report, a, opt.mom_group_size, opt.tol);
  if (a.layout() != Layout::PerWorker) throw std::invalid_argument("baseline aggregators need the per-worker layout");
  report.check_complete(a);
  AggregationResult res;
  std::vector<Vector> inputs;
  for (FileId i = 0; i < a.file_count(); ++i) {
    inputs.push_back(report.value(a, a.workers_of(i).front(), i));
    if (report.has_truth() && !same_value(inputs.back(), report.truth()[i], opt.tol)) res.corrupted_files.insert(i);
    res.used_files.insert(i);
  }
  const int q = a.params().q;
  switch (agg) {
    case Aggregator::BaselineMedian: res.gradient = coordinate_median(inputs); break;
    case Aggregator::MedianOfMeans: res.gradient = median_of_means(inputs, opt.mom_group_size); break;
    case Aggregator::MultiKrum: res.gradient = multi_krum(inputs, q, opt.krum_m); break;
    case Aggregator::Bulyan: res.gradient = bulyan(inputs, q); break;
    default: throw std::invalid_argument("baseline_aggregate: unsupported aggregator");
  }
  return res;
}

}  // namespace aspis
