#pragma once

// Distortion-fraction calculators.
//
// epsilon = c / f where c counts files (or groups, or inputs) whose
// contribution to the update is distorted after detection and aggregation.
//
//   Aspis, weak attack        c = C(q, r)          f = C(K, r)
//   Aspis, optimal attack     c = C(2q, r) / 2     f = C(K, r)
//   baseline (no redundancy)  c = q                f = K
//   DETOX, optimal placement  c = floor(q / r')    f = K / r
//   DETOX, round-robin        c = max(q - (K/r)(r'-1), 0)
//
// brute_force_cmax recomputes the optimal-attack count from first
// principles by searching over disagreement sets.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aspis/aggregation.hpp"
#include "aspis/assignment.hpp"
#include "aspis/attacks.hpp"
#include "aspis/combinatorics.hpp"
#include "aspis/detection.hpp"
#include "aspis/report.hpp"
#include "aspis/rng.hpp"

namespace aspis {

enum class Scheme { Aspis, Baseline, Detox };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Aspis: return "aspis";
    case Scheme::Baseline: return "baseline";
    case Scheme::Detox: return "detox";
  }
  return "?";
}

inline Scheme scheme_of(Aggregator a) {
  switch (layout_for(a)) {
    case Layout::Subset: return Scheme::Aspis;
    case Layout::Groups: return Scheme::Detox;
    default: return Scheme::Baseline;
  }
}

struct EpsilonRecord {
  Scheme scheme = Scheme::Aspis;
  /// Empty for the baseline, where the choice of adversaries does not matter.
  std::optional<AttackMode> mode;
  int K = 0, r = 0, q = 0;
  std::uint64_t corrupted = 0;
  std::uint64_t total = 1;

  double fraction() const { return static_cast<double>(corrupted) / static_cast<double>(total); }

  /// epsilon * 1000 rounded half-up, computed exactly.
  std::uint64_t permille() const { return (2000 * corrupted + total) / (2 * total); }

  /// Three-decimal rendering, e.g. "0.062".
  std::string rounded() const {
    const auto p = permille();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%03llu", static_cast<unsigned long long>(p / 1000),
                  static_cast<unsigned long long>(p % 1000));
    return buf;
  }

  std::string mode_name() const { return mode ? to_string(*mode) : "any"; }
};

namespace detail {

inline EpsilonRecord make_record(Scheme s, std::optional<AttackMode> m, int K, int r, int q, std::uint64_t c,
                                 std::uint64_t f) {
  EpsilonRecord e;
  e.scheme = s;
  e.mode = m;
  e.K = K;
  e.r = r;
  e.q = q;
  e.corrupted = c;
  e.total = f;
  return e;
}

}  // namespace detail

inline EpsilonRecord epsilon_aspis_optimal(int K, int r, int q) {
  ClusterParams{K, r, q}.validate();
  // sum_{i >= r'} C(q, i) C(q, r - i) is exactly half of C(2q, r) for odd r.
  const std::uint64_t c = binomial(2 * q, r) / 2;
  return detail::make_record(Scheme::Aspis, AttackMode::Optimal, K, r, q, c, binomial(K, r));
}

inline EpsilonRecord epsilon_aspis_weak(int K, int r, int q) {
  ClusterParams{K, r, q}.validate();
  return detail::make_record(Scheme::Aspis, AttackMode::Weak, K, r, q, binomial(q, r), binomial(K, r));
}

inline EpsilonRecord epsilon_baseline(int K, int q) {
  ClusterParams{K, 1, q}.validate();
  return detail::make_record(Scheme::Baseline, std::nullopt, K, 1, q, static_cast<std::uint64_t>(q),
                             static_cast<std::uint64_t>(K));
}

inline EpsilonRecord epsilon_detox(int K, int r, int q, AttackMode mode) {
  const ClusterParams p{K, r, q};
  p.validate();
  if (K % r != 0)
    throw std::invalid_argument("detox requires r | K (got K=" + std::to_string(K) + ", r=" + std::to_string(r) + ")");
  const int groups = K / r;
  const int rp = p.majority();
  std::uint64_t c = 0;
  if (mode == AttackMode::Optimal) {
    c = static_cast<std::uint64_t>(q / rp);
  } else {
    const int tolerated = groups * (rp - 1);
    c = q > tolerated ? static_cast<std::uint64_t>(q - tolerated) : 0;
  }
  return detail::make_record(Scheme::Detox, mode, K, r, q, c, static_cast<std::uint64_t>(groups));
}

/// Raised when an exhaustive search would exceed its work budget.
class InstanceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Exhaustive maximum, over disagreement sets D_1..D_q with |D_i| <= q, of the
/// number of files some active adversary coalition A' (|A'| >= r') can
/// corrupt, i.e. files F with an A' in F such that every member of F outside
/// A' lies in every D_i, i in A'.
///
/// Search reductions:
///   * the count is monotone in each D_i, so only |D_i| = min(q, K-1) is tried;
///   * relabelling honest workers preserves the count, so D_1's honest part is
///     fixed to the lowest-labelled honest workers.
/// Adversaries are workers 0..q-1 (any labelling is equivalent).
inline std::uint64_t brute_force_cmax(int K, int r, int q, double max_work = 2e9) {
  ClusterParams{K, r, q}.validate();
  if (K > 64) throw InstanceTooLarge("brute_force_cmax: K must be at most 64");
  const int rp = (r + 1) / 2;
  if (q == 0) return 0;

  using Mask = std::uint64_t;
  const Mask adv_mask = (q == 64) ? ~Mask{0} : ((Mask{1} << q) - 1);
  const int dsize = std::min(q, K - 1);

  // (active coalition, members that must be in its intersection) per file;
  // a file counts if any of its alternatives is satisfied.
  struct Alternative {
    Mask active;
    Mask rest;
  };
  std::vector<std::vector<Alternative>> files;
  std::uint64_t alt_total = 0;
  for_each_subset(1, K, r, [&](const WorkerSet& s) {
    Mask f = 0;
    for (Worker w : s) f |= Mask{1} << (w - 1);
    const Mask a = f & adv_mask;
    if (std::popcount(a) < rp) return;
    std::vector<Alternative> alts;
    // every submask of a with at least r' members
    for (Mask sub = a;; sub = (sub - 1) & a) {
      if (std::popcount(sub) >= rp) alts.push_back({sub, f & ~sub});
      if (sub == 0) break;
    }
    alt_total += alts.size();
    files.push_back(std::move(alts));
  });

  // Candidate D_i for adversary i: all dsize-subsets of the other K-1 workers.
  auto candidates_for = [&](int i) {
    std::vector<Mask> out;
    for_each_subset(1, K - 1, dsize, [&](const WorkerSet& s) {
      Mask m = 0;
      for (Worker w : s) {
        const int bit = (w - 1) < i ? (w - 1) : w;  // skip worker i itself
        m |= Mask{1} << bit;
      }
      out.push_back(m);
    });
    return out;
  };

  // Canonical D_1 (adversary 0): any adversarial part, honest part = lowest honest labels.
  std::vector<Mask> first;
  for (int s = 0; s <= std::min(dsize, q - 1); ++s) {
    const int h = dsize - s;
    if (h > K - q) continue;
    Mask honest_part = 0;
    for (int k = 0; k < h; ++k) honest_part |= Mask{1} << (q + k);
    for_each_subset(2, q, s, [&](const WorkerSet& advs) {
      Mask m = honest_part;
      for (Worker w : advs) m |= Mask{1} << (w - 1);
      first.push_back(m);
    });
  }

  std::vector<std::vector<Mask>> cand(static_cast<std::size_t>(q));
  cand[0] = first;
  for (int i = 1; i < q; ++i) cand[static_cast<std::size_t>(i)] = candidates_for(i);

  double configs = static_cast<double>(first.size());
  for (int i = 1; i < q; ++i) configs *= static_cast<double>(cand[static_cast<std::size_t>(i)].size());
  const double work = configs * static_cast<double>(std::max<std::uint64_t>(alt_total, 1));
  if (work > max_work) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "brute_force_cmax(K=%d, r=%d, q=%d): search needs about %.3g coalition checks, "
                  "above the bound of %.3g",
                  K, r, q, work, max_work);
    throw InstanceTooLarge(buf);
  }

  std::vector<Mask> D(static_cast<std::size_t>(q), 0);
  std::uint64_t best = 0;
  auto evaluate = [&]() {
    std::uint64_t count = 0;
    for (const auto& alts : files) {
      for (const auto& alt : alts) {
        bool ok = true;
        for (Mask m = alt.active; m && ok; m &= m - 1) {
          const int i = std::countr_zero(m);
          ok = (alt.rest & ~D[static_cast<std::size_t>(i)]) == 0;
        }
        if (ok) {
          ++count;
          break;
        }
      }
    }
    best = std::max(best, count);
  };
  auto recurse = [&](auto&& self, int i) -> void {
    if (i == q) {
      evaluate();
      return;
    }
    for (Mask m : cand[static_cast<std::size_t>(i)]) {
      D[static_cast<std::size_t>(i)] = m;
      self(self, i + 1);
    }
  };
  recurse(recurse, 0);
  return best;
}

/// Default plan for a scheme: Aspis uses the weak or fixed-disagreement plan
/// with adversaries {1..q}; DETOX uses the placement rule for the mode; the
/// baseline uses adversaries {1..q}. Outside Aspis every adversary distorts
/// everything it holds.
inline AttackPlan default_plan(Aggregator agg, const ClusterParams& params, AttackMode mode,
                               DistortionMethod method = Reversed{}) {
  WorkerSet first_q;
  for (Worker j = 1; j <= params.q; ++j) first_q.push_back(j);
  switch (scheme_of(agg)) {
    case Scheme::Aspis:
      return mode == AttackMode::Weak ? weak_plan(params, first_q, std::move(method))
                                      : optimal_plan(params, first_q, std::move(method));
    case Scheme::Detox:
      return distort_all_plan(params, detox_adversary_choice(params.K, params.r, params.q, mode), std::move(method));
    case Scheme::Baseline:
      return distort_all_plan(params, first_q, std::move(method));
  }
  throw std::logic_error("unreachable");
}

/// Random file gradients with coordinates drawn from N(0, 1).
inline std::vector<Vector> random_file_gradients(std::uint64_t f, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed, 0x6d656173ULL);
  std::vector<Vector> out(f, Vector(dim));
  for (auto& v : out)
    for (auto& x : v) x = rng.normal();
  return out;
}

struct Measurement {
  EpsilonRecord record;
  std::optional<DetectionOutcome> outcome;
  std::optional<AgreementGraph> graph;
};

/// One pipeline iteration on synthetic gradients: assignment, honest report,
/// attack, detection (Aspis only) and aggregation; the corrupted count is
/// read off the aggregation result.
inline Measurement run_measurement(const ClusterParams& params, const AttackPlan& plan, Aggregator agg,
                                   std::uint64_t seed, std::size_t dim = 4, const AggregatorOptions& opt = {}) {
  params.validate();
  const Assignment a = make_assignment(agg, params);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), dim, seed));
  const auto report = apply_attack(plan, honest, a);

  Measurement m;
  AggregationResult res;
  if (agg == Aggregator::Aspis) {
    auto g = build_agreement_graph(report, a, opt.tol);
    m.outcome = classify(g, params.q);
    m.graph = std::move(g);
    res = aspis_aggregate(report, a, *m.outcome, opt.tol);
  } else {
    res = baseline_aggregate(agg, report, a, opt);
  }
  std::optional<AttackMode> mode;
  if (scheme_of(agg) == Scheme::Aspis && plan.kind != PlanKind::None)
    mode = plan.kind == PlanKind::Optimal ? AttackMode::Optimal : AttackMode::Weak;
  m.record = detail::make_record(scheme_of(agg), mode, params.K, a.params().r, params.q, res.corrupted_files.size(),
                                 a.file_count());
  return m;
}

inline EpsilonRecord measure_epsilon(const ClusterParams& params, const AttackPlan& plan, Aggregator agg,
                                     std::uint64_t seed) {
  return run_measurement(params, plan, agg, seed).record;
}

/// Closed-form rows for one (K, r) and a range of q: Aspis optimal/weak,
/// baseline, DETOX optimal/weak (DETOX rows only when r | K).
inline std::vector<EpsilonRecord> epsilon_rows(int K, int r, int q_min, int q_max) {
  std::vector<EpsilonRecord> rows;
  for (int q = q_min; q <= q_max; ++q) {
    rows.push_back(epsilon_aspis_optimal(K, r, q));
    rows.push_back(epsilon_aspis_weak(K, r, q));
    auto base = epsilon_baseline(K, q);
    base.r = r;  // reported against the configuration it is compared with
    rows.push_back(base);
    if (K % r == 0) {
      rows.push_back(epsilon_detox(K, r, q, AttackMode::Optimal));
      rows.push_back(epsilon_detox(K, r, q, AttackMode::Weak));
    }
  }
  return rows;
}

inline void write_epsilon_csv_header(std::ostream& os) { os << "K,r,q,scheme,mode,corrupted,epsilon\n"; }

inline void write_epsilon_csv_row(std::ostream& os, const EpsilonRecord& e) {
  os << e.K << ',' << e.r << ',' << e.q << ',' << to_string(e.scheme) << ',' << e.mode_name() << ',' << e.corrupted
     << ',' << e.rounded() << '\n';
}

}  // namespace aspis
