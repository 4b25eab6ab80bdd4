#pragma once

// Redundant file-to-worker placement.
//
// The subset layout associates every r-subset of the K workers with exactly
// one file, so f = C(K, r), each worker holds l = C(K-1, r-1) files and every
// pair of workers shares C(K-2, r-2) files. Two comparison layouts reuse the
// same container: disjoint groups of r replicas (f = K/r) and one file per
// worker (f = K).

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aspis/combinatorics.hpp"

namespace aspis {

struct ClusterParams {
  int K = 0;  ///< workers
  int r = 0;  ///< redundancy, odd
  int q = 0;  ///< adversaries, q < K/2

  /// Majority threshold r' = (r + 1) / 2.
  int majority() const { return (r + 1) / 2; }
  std::uint64_t files() const { return binomial(K, r); }
  std::uint64_t load() const { return binomial(K - 1, r - 1); }
  std::uint64_t pair_overlap() const { return binomial(K - 2, r - 2); }

  /// Throws std::invalid_argument naming the violated bound.
  void validate() const {
    if (K <= 0) throw std::invalid_argument("K must be positive (got " + std::to_string(K) + ")");
    if (r < 1 || r > K)
      throw std::invalid_argument("r must satisfy 1 <= r <= K (got r=" + std::to_string(r) +
                                  ", K=" + std::to_string(K) + ")");
    if (r % 2 == 0)
      throw std::invalid_argument("r must be odd so that a strict majority exists (got r=" +
                                  std::to_string(r) + ")");
    if (q < 0) throw std::invalid_argument("q must be non-negative (got " + std::to_string(q) + ")");
    if (2 * q >= K)
      throw std::invalid_argument("adversary bound violated: q must satisfy q < K/2 (got q=" +
                                  std::to_string(q) + ", K=" + std::to_string(K) + ")");
  }

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

inline void to_json(nlohmann::json& j, const ClusterParams& p) {
  j = nlohmann::json{{"K", p.K}, {"r", p.r}, {"q", p.q}};
}
inline void from_json(const nlohmann::json& j, ClusterParams& p) {
  j.at("K").get_to(p.K);
  j.at("r").get_to(p.r);
  p.q = j.value("q", 0);
}

enum class Layout {
  Subset,      ///< every r-subset of workers is one file
  Groups,      ///< K/r disjoint groups, one file per group
  PerWorker,   ///< one file per worker, no redundancy
};

inline const char* to_string(Layout l) {
  switch (l) {
    case Layout::Subset: return "subset";
    case Layout::Groups: return "groups";
    case Layout::PerWorker: return "per-worker";
  }
  return "?";
}

/// Immutable placement of files onto workers. Worker arguments are 1-based.
class Assignment {
 public:
  const ClusterParams& params() const { return params_; }
  Layout layout() const { return layout_; }
  int workers() const { return params_.K; }
  std::uint64_t file_count() const { return workers_of_file_.size(); }

  /// Files held by worker j, ascending.
  const std::vector<FileId>& files_of(Worker j) const { return files_of_worker_.at(index(j)); }
  /// Workers holding file i, ascending.
  const WorkerSet& workers_of(FileId i) const { return workers_of_file_.at(i); }

  /// Position of file i inside files_of(j), or -1 if j does not hold i.
  std::ptrdiff_t slot_of(Worker j, FileId i) const {
    const auto& fs = files_of(j);
    auto it = std::lower_bound(fs.begin(), fs.end(), i);
    if (it == fs.end() || *it != i) return -1;
    return it - fs.begin();
  }

  /// Files held by both j1 and j2, ascending.
  std::vector<FileId> shared_files(Worker j1, Worker j2) const {
    const auto& a = files_of(j1);
    const auto& b = files_of(j2);
    std::vector<FileId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  static Assignment subset(const ClusterParams& params) {
    params.validate();
    if (params.r < 3)
      throw std::invalid_argument("subset layout requires r >= 3 (got r=" + std::to_string(params.r) +
                                  ")");
    const std::uint64_t f = params.files();
    Assignment a(params, Layout::Subset);
    a.workers_of_file_.reserve(f);
    a.files_of_worker_.assign(static_cast<std::size_t>(params.K), {});
    for (auto& fs : a.files_of_worker_) fs.reserve(params.load());
    for (FileId i = 0; i < f; ++i) {
      a.workers_of_file_.push_back(subset_unrank(i, params.K, params.r));
      for (Worker j : a.workers_of_file_.back()) a.files_of_worker_[index(j)].push_back(i);
    }
    return a;
  }

  /// K/r groups of consecutive workers {1..r}, {r+1..2r}, ...; group g is file g.
  static Assignment groups(const ClusterParams& params) {
    params.validate();
    if (params.K % params.r != 0)
      throw std::invalid_argument("group layout requires r | K (got K=" + std::to_string(params.K) +
                                  ", r=" + std::to_string(params.r) + ")");
    Assignment a(params, Layout::Groups);
    const int g = params.K / params.r;
    a.files_of_worker_.assign(static_cast<std::size_t>(params.K), {});
    for (int gi = 0; gi < g; ++gi) {
      WorkerSet members;
      for (int m = 0; m < params.r; ++m) {
        Worker j = gi * params.r + m + 1;
        members.push_back(j);
        a.files_of_worker_[index(j)].push_back(static_cast<FileId>(gi));
      }
      a.workers_of_file_.push_back(std::move(members));
    }
    return a;
  }

  /// Worker j holds file j - 1 alone.
  static Assignment per_worker(const ClusterParams& params) {
    ClusterParams p = params;
    p.r = 1;
    p.validate();
    Assignment a(p, Layout::PerWorker);
    a.files_of_worker_.assign(static_cast<std::size_t>(p.K), {});
    for (Worker j = 1; j <= p.K; ++j) {
      a.workers_of_file_.push_back({j});
      a.files_of_worker_[index(j)].push_back(static_cast<FileId>(j - 1));
    }
    return a;
  }

  static std::size_t index(Worker j) { return static_cast<std::size_t>(j - 1); }

 private:
  Assignment(ClusterParams p, Layout l) : params_(p), layout_(l) {}

  ClusterParams params_;
  Layout layout_;
  std::vector<std::vector<FileId>> files_of_worker_;
  std::vector<WorkerSet> workers_of_file_;
};

/// Subset-based assignment: f = C(K, r) files, file i held by the i-th
/// r-subset in colex order.
inline Assignment build_assignment(const ClusterParams& params) { return Assignment::subset(params); }

/// Half-open range [begin, end) of positions inside a batch.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

/// Splits a batch of b samples into f contiguous ranges; the first (b mod f)
/// ranges hold one extra sample.
inline std::vector<SampleRange> partition_batch(std::size_t b, std::uint64_t f) {
  if (f == 0) throw std::invalid_argument("partition_batch: file count must be positive");
  if (b < f)
    throw std::invalid_argument("partition_batch: batch size " + std::to_string(b) +
                                " smaller than file count " + std::to_string(f));
  const std::size_t base = b / f;
  const std::size_t extra = b % f;
  std::vector<SampleRange> out;
  out.reserve(f);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < f; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.push_back({pos, pos + len});
    pos += len;
  }
  return out;
}

// Only the parameters are stored; adjacency is regenerated on load.
inline void to_json(nlohmann::json& j, const Assignment& a) {
  j = nlohmann::json{{"layout", to_string(a.layout())},
                     {"params", a.params()},
                     {"order", a.layout() == Layout::Subset ? "colex" : "sequential"}};
}

inline Assignment assignment_from_json(const nlohmann::json& j) {
  const auto params = j.at("params").get<ClusterParams>();
  const auto layout = j.value("layout", std::string("subset"));
  if (layout == "subset") {
    if (j.value("order", std::string("colex")) != "colex")
      throw std::invalid_argument("assignment: unsupported subset order");
    return Assignment::subset(params);
  }
  if (layout == "groups") return Assignment::groups(params);
  if (layout == "per-worker") return Assignment::per_worker(params);
  throw std::invalid_argument("assignment: unknown layout '" + layout + "'");
}

}  // namespace aspis
