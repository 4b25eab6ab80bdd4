#pragma once

// Clique-based adversary detection.
//
// Two workers are joined in the agreement graph iff their returned vectors
// coincide on every file they share. Honest workers always agree, so the
// honest set is a clique of size >= K - q. A unique maximum clique is taken
// as the honest set; anything else is reported as ambiguous and the caller
// falls back to robust aggregation.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <json.hpp>

#include "aspis/assignment.hpp"
#include "aspis/report.hpp"

namespace aspis {

using Bitset = boost::dynamic_bitset<std::uint64_t>;

/// Undirected simple graph on workers 1..K.
class AgreementGraph {
 public:
  explicit AgreementGraph(int K = 0) : K_(K), adj_(static_cast<std::size_t>(K), Bitset(static_cast<std::size_t>(K))) {}

  int size() const { return K_; }

  void connect(Worker a, Worker b) {
    if (a == b) throw std::invalid_argument("agreement graph: self-loops are not allowed");
    adj_.at(idx(a)).set(idx(b));
    adj_.at(idx(b)).set(idx(a));
  }
  void disconnect(Worker a, Worker b) {
    adj_.at(idx(a)).reset(idx(b));
    adj_.at(idx(b)).reset(idx(a));
  }
  bool edge(Worker a, Worker b) const { return a != b && adj_.at(idx(a)).test(idx(b)); }
  std::size_t degree(Worker a) const { return adj_.at(idx(a)).count(); }
  /// Neighbourhood of worker a as a bitset over 0-based indices.
  const Bitset& neighbours(Worker a) const { return adj_.at(idx(a)); }

  std::vector<std::pair<Worker, Worker>> edges() const {
    std::vector<std::pair<Worker, Worker>> out;
    for (Worker a = 1; a <= K_; ++a)
      for (Worker b = a + 1; b <= K_; ++b)
        if (edge(a, b)) out.emplace_back(a, b);
    return out;
  }

  static AgreementGraph complete(int K) {
    AgreementGraph g(K);
    for (Worker a = 1; a <= K; ++a)
      for (Worker b = a + 1; b <= K; ++b) g.connect(a, b);
    return g;
  }

 private:
  static std::size_t idx(Worker a) { return static_cast<std::size_t>(a - 1); }

  int K_;
  std::vector<Bitset> adj_;
};

inline void to_json(nlohmann::json& j, const AgreementGraph& g) {
  auto edges = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  j = nlohmann::json{{"K", g.size()}, {"edges", std::move(edges)}};
}

inline AgreementGraph graph_from_json(const nlohmann::json& j) {
  AgreementGraph g(j.at("K").get<int>());
  for (const auto& e : j.at("edges")) g.connect(e.at(0).get<Worker>(), e.at(1).get<Worker>());
  return g;
}

/// Number of shared files on which workers j1 and j2 returned equal vectors.
inline std::uint64_t count_agreements(const WorkerReport& report, const Assignment& a, Worker j1, Worker j2,
                                      double tol = 0.0) {
  if (j1 == j2) throw std::invalid_argument("count_agreements: workers must differ");
  const auto& f1 = a.files_of(j1);
  const auto& f2 = a.files_of(j2);
  const auto& v1 = report.values(j1);
  const auto& v2 = report.values(j2);
  std::uint64_t agree = 0;
  std::size_t s1 = 0, s2 = 0;
  while (s1 < f1.size() && s2 < f2.size()) {
    if (f1[s1] < f2[s2]) {
      ++s1;
    } else if (f2[s2] < f1[s1]) {
      ++s2;
    } else {
      if (same_value(v1[s1], v2[s2], tol)) ++agree;
      ++s1;
      ++s2;
    }
  }
  return agree;
}

/// Edge (j1, j2) iff the pair agrees on all of its shared files.
inline AgreementGraph build_agreement_graph(const WorkerReport& report, const Assignment& a, double tol = 0.0) {
  report.check_complete(a);
  const int K = a.workers();
  AgreementGraph g(K);
  for (Worker j1 = 1; j1 <= K; ++j1) {
    for (Worker j2 = j1 + 1; j2 <= K; ++j2) {
      const auto shared = a.layout() == Layout::Subset ? a.params().pair_overlap()
                                                       : a.shared_files(j1, j2).size();
      if (count_agreements(report, a, j1, j2, tol) == shared) g.connect(j1, j2);
    }
  }
  return g;
}

namespace detail {

// Bron-Kerbosch with Tomita pivoting, restricted to maximum cliques: a branch
// is abandoned once |R| + |P| cannot reach the best size seen so far, which
// never discards a clique of maximum size.
class MaxCliqueSearch {
 public:
  explicit MaxCliqueSearch(const AgreementGraph& g) : g_(g) {}

  std::vector<WorkerSet> run(const Bitset& candidates) {
    Bitset R(candidates.size());
    Bitset X(candidates.size());
    expand(R, 0, candidates, X);
    std::vector<WorkerSet> out;
    out.reserve(found_.size());
    for (const auto& c : found_) {
      WorkerSet s;
      for (auto i = c.find_first(); i != Bitset::npos; i = c.find_next(i)) s.push_back(static_cast<Worker>(i + 1));
      out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void expand(Bitset& R, std::size_t rsize, const Bitset& P, const Bitset& X) {
    const std::size_t psize = P.count();
    if (rsize + psize < best_) return;
    if (psize == 0) {
      if (X.none()) record(R, rsize);
      return;
    }
    // Pivot u in P | X maximizing |P & N(u)|.
    std::size_t pivot = Bitset::npos;
    std::size_t pivot_hits = 0;
    const Bitset PX = P | X;
    for (auto u = PX.find_first(); u != Bitset::npos; u = PX.find_next(u)) {
      const std::size_t hits = (P & nbr(u)).count();
      if (pivot == Bitset::npos || hits > pivot_hits) {
        pivot = u;
        pivot_hits = hits;
      }
    }
    Bitset P_local = P;
    Bitset X_local = X;
    const Bitset branch = P - nbr(pivot);
    for (auto v = branch.find_first(); v != Bitset::npos; v = branch.find_next(v)) {
      R.set(v);
      expand(R, rsize + 1, P_local & nbr(v), X_local & nbr(v));
      R.reset(v);
      P_local.reset(v);
      X_local.set(v);
      if (rsize + P_local.count() < best_) return;
    }
  }

  void record(const Bitset& R, std::size_t rsize) {
    if (rsize > best_) {
      best_ = rsize;
      found_.clear();
    }
    if (rsize == best_) found_.push_back(R);
  }

  const Bitset& nbr(std::size_t i) const { return g_.neighbours(static_cast<Worker>(i + 1)); }

  const AgreementGraph& g_;
  std::size_t best_ = 0;
  std::vector<Bitset> found_;
};

}  // namespace detail

/// All maximum cliques of g, each sorted, in lexicographic order.
inline std::vector<WorkerSet> enumerate_maximum_cliques(const AgreementGraph& g) {
  if (g.size() == 0) return {};
  Bitset all(static_cast<std::size_t>(g.size()));
  all.set();
  return detail::MaxCliqueSearch(g).run(all);
}

/// Same as above after discarding every worker of degree < K - q - 1. Such a
/// worker cannot lie in a clique of size >= K - q, and the honest workers
/// always form one, so the result is unchanged whenever the honest
/// assumption holds.
inline std::vector<WorkerSet> enumerate_maximum_cliques(const AgreementGraph& g, int q) {
  const int K = g.size();
  if (K == 0) return {};
  Bitset keep(static_cast<std::size_t>(K));
  const auto min_degree = static_cast<std::size_t>(std::max(K - q - 1, 0));
  for (Worker j = 1; j <= K; ++j)
    if (g.degree(j) >= min_degree) keep.set(static_cast<std::size_t>(j - 1));
  if (keep.none()) return {};
  return detail::MaxCliqueSearch(g).run(keep);
}

struct Detected {
  WorkerSet honest;
  WorkerSet adversarial;
};
struct Ambiguous {
  std::vector<WorkerSet> maximum_cliques;
};
using DetectionOutcome = std::variant<Detected, Ambiguous>;

inline bool is_detected(const DetectionOutcome& o) { return std::holds_alternative<Detected>(o); }
inline const char* outcome_tag(const DetectionOutcome& o) { return is_detected(o) ? "detected" : "ambiguous"; }

/// Classifies an agreement graph. A unique maximum clique smaller than K - q
/// cannot be the honest set and is reported as Ambiguous.
inline DetectionOutcome classify(const AgreementGraph& g, int q) {
  auto cliques = enumerate_maximum_cliques(g, q);
  const int K = g.size();
  if (cliques.size() == 1 && static_cast<int>(cliques.front().size()) >= K - q) {
    Detected d;
    d.honest = std::move(cliques.front());
    for (Worker j = 1; j <= K; ++j)
      if (!std::binary_search(d.honest.begin(), d.honest.end(), j)) d.adversarial.push_back(j);
    return d;
  }
  return Ambiguous{std::move(cliques)};
}

inline DetectionOutcome detect(const WorkerReport& report, const Assignment& a, double tol = 0.0) {
  return classify(build_agreement_graph(report, a, tol), a.params().q);
}

}  // namespace aspis
