#pragma once

// Adversary placement, collusion strategies and gradient distortion.
//
// Adversaries collude: every distorted file receives one distorted vector,
// computed once per file, which all adversarial members of that file return.
// Which files get distorted is decided by the plan kind:
//   weak     every file an adversary holds;
//   optimal  files whose adversarial members A' satisfy |A'| >= r' and whose
//            remaining members all lie in the intersection of the D_a, a in A'.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aspis/assignment.hpp"
#include "aspis/detection.hpp"
#include "aspis/report.hpp"

namespace aspis {

/// Returns -c * g.
struct Reversed {
  double c = 1.0;
};
/// Returns a fixed vector.
struct ConstantVector {
  Vector value;
};
/// Returns mu + z * sigma, per-coordinate statistics of the batch's true file
/// gradients (sample standard deviation).
struct Alie {
  double z = 1.0;
};
/// Returns -epsilon * mean of the batch's true file gradients.
struct FallOfEmpires {
  double epsilon = 1.0;
};

using DistortionMethod = std::variant<Reversed, ConstantVector, Alie, FallOfEmpires>;

inline void validate(const DistortionMethod& m) {
  std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Reversed>) {
          if (!(x.c > 0) || !std::isfinite(x.c)) throw std::invalid_argument("reversed: c must be positive");
        } else if constexpr (std::is_same_v<T, FallOfEmpires>) {
          if (!(x.epsilon > 0) || !std::isfinite(x.epsilon))
            throw std::invalid_argument("foe: epsilon must be positive");
        } else if constexpr (std::is_same_v<T, Alie>) {
          if (!std::isfinite(x.z)) throw std::invalid_argument("alie: z must be finite");
        } else {
          for (double v : x.value)
            if (!std::isfinite(v)) throw std::invalid_argument("constant: value must be finite");
        }
      },
      m);
}

enum class PlanKind { None, Weak, Optimal };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::None: return "none";
    case PlanKind::Weak: return "weak";
    case PlanKind::Optimal: return "optimal";
  }
  return "?";
}

struct AttackPlan {
  PlanKind kind = PlanKind::None;
  WorkerSet adversaries;
  /// D_a for every adversary a.
  std::map<Worker, WorkerSet> disagreement;
  DistortionMethod distortion = Reversed{};

  bool is_adversary(Worker j) const { return std::binary_search(adversaries.begin(), adversaries.end(), j); }

  /// Whether the adversarial members of file i distort it.
  bool distorts(const Assignment& a, FileId i) const {
    if (kind == PlanKind::None) return false;
    const auto& members = a.workers_of(i);
    WorkerSet active;
    for (Worker j : members)
      if (is_adversary(j)) active.push_back(j);
    if (active.empty()) return false;
    if (kind == PlanKind::Weak) return true;
    if (static_cast<int>(active.size()) < a.params().majority()) return false;
    for (Worker j : members) {
      if (is_adversary(j)) continue;
      for (Worker adv : active) {
        const auto& d = disagreement.at(adv);
        if (!std::binary_search(d.begin(), d.end(), j)) return false;
      }
    }
    return true;
  }
};

namespace detail {

inline WorkerSet normalized(WorkerSet s, int K, const char* what) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument(std::string(what) + ": duplicate worker");
  for (Worker j : s)
    if (j < 1 || j > K)
      throw std::invalid_argument(std::string(what) + ": worker " + std::to_string(j) + " outside [1, " +
                                  std::to_string(K) + "]");
  return s;
}

inline WorkerSet complement(const WorkerSet& s, int K) {
  WorkerSet out;
  for (Worker j = 1; j <= K; ++j)
    if (!std::binary_search(s.begin(), s.end(), j)) out.push_back(j);
  return out;
}

}  // namespace detail

/// Every adversary distorts every file it holds. D_a is recorded as the full
/// honest set, which is what the resulting agreement graph shows.
inline AttackPlan weak_plan(const ClusterParams& params, WorkerSet adversaries, DistortionMethod method) {
  params.validate();
  validate(method);
  adversaries = detail::normalized(std::move(adversaries), params.K, "weak_plan");
  if (static_cast<int>(adversaries.size()) != params.q)
    throw std::invalid_argument("weak_plan: expected " + std::to_string(params.q) + " adversaries, got " +
                                std::to_string(adversaries.size()));
  AttackPlan plan;
  plan.distortion = std::move(method);
  if (adversaries.empty()) return plan;
  plan.kind = PlanKind::Weak;
  const auto honest = detail::complement(adversaries, params.K);
  for (Worker a : adversaries) plan.disagreement[a] = honest;
  plan.adversaries = std::move(adversaries);
  return plan;
}

/// The q lowest-labelled workers outside the adversary set.
inline WorkerSet default_disagreement_set(const ClusterParams& params, const WorkerSet& adversaries) {
  WorkerSet sorted = adversaries;
  std::sort(sorted.begin(), sorted.end());
  WorkerSet out;
  for (Worker j = 1; j <= params.K && static_cast<int>(out.size()) < params.q; ++j)
    if (!std::binary_search(sorted.begin(), sorted.end(), j)) out.push_back(j);
  return out;
}

/// All adversaries share one disagreement set D of q honest workers and
/// distort exactly the files where they hold a majority and every other
/// member is in D. The adversaries then form a (K-q)-clique with H \ D,
/// competing with the honest clique.
inline AttackPlan optimal_plan(const ClusterParams& params, WorkerSet adversaries, WorkerSet D,
                               DistortionMethod method) {
  params.validate();
  validate(method);
  adversaries = detail::normalized(std::move(adversaries), params.K, "optimal_plan");
  D = detail::normalized(std::move(D), params.K, "optimal_plan");
  if (static_cast<int>(adversaries.size()) != params.q)
    throw std::invalid_argument("optimal_plan: expected " + std::to_string(params.q) + " adversaries, got " +
                                std::to_string(adversaries.size()));
  if (static_cast<int>(D.size()) != params.q)
    throw std::invalid_argument("optimal_plan: disagreement set must have exactly q=" + std::to_string(params.q) +
                                " members, got " + std::to_string(D.size()));
  for (Worker j : D)
    if (std::binary_search(adversaries.begin(), adversaries.end(), j))
      throw std::invalid_argument("optimal_plan: disagreement set must be disjoint from the adversaries");
  AttackPlan plan;
  plan.distortion = std::move(method);
  if (adversaries.empty()) return plan;
  plan.kind = PlanKind::Optimal;
  for (Worker a : adversaries) plan.disagreement[a] = D;
  plan.adversaries = std::move(adversaries);
  return plan;
}

inline AttackPlan optimal_plan(const ClusterParams& params, WorkerSet adversaries, DistortionMethod method) {
  auto D = default_disagreement_set(params, adversaries);
  return optimal_plan(params, std::move(adversaries), std::move(D), std::move(method));
}

enum class AttackMode { Weak, Optimal };

inline const char* to_string(AttackMode m) { return m == AttackMode::Weak ? "weak" : "optimal"; }

inline AttackMode parse_attack_mode(const std::string& s) {
  if (s == "weak") return AttackMode::Weak;
  if (s == "optimal") return AttackMode::Optimal;
  throw std::invalid_argument("unknown attack mode '" + s + "' (expected weak or optimal)");
}

/// Adversary placement against the group layout (groups {1..r}, {r+1..2r}, ...).
///   optimal: fill groups with r' adversaries each, floor(q/r') groups taken
///            over, the remainder placed in the next group;
///   weak:    round-robin, the i-th adversary is the lowest free worker of
///            group i mod (K/r).
inline WorkerSet detox_adversary_choice(int K, int r, int q, AttackMode mode) {
  ClusterParams p{K, r, q};
  p.validate();
  if (K % r != 0)
    throw std::invalid_argument("detox placement requires r | K (got K=" + std::to_string(K) +
                                ", r=" + std::to_string(r) + ")");
  const int groups = K / r;
  const int rp = p.majority();
  WorkerSet out;
  if (mode == AttackMode::Optimal) {
    for (int i = 0; i < q; ++i) out.push_back((i / rp) * r + (i % rp) + 1);
  } else {
    std::vector<int> used(static_cast<std::size_t>(groups), 0);
    for (int i = 0; i < q; ++i) {
      const int g = i % groups;
      out.push_back(g * r + used[static_cast<std::size_t>(g)] + 1);
      ++used[static_cast<std::size_t>(g)];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Plan for the redundancy-free and group layouts: the given adversaries
/// distort every file they hold.
inline AttackPlan distort_all_plan(const ClusterParams& params, WorkerSet adversaries, DistortionMethod method) {
  return weak_plan(params, std::move(adversaries), std::move(method));
}

namespace detail {

inline std::vector<Vector> true_file_gradients(const WorkerReport& honest, const Assignment& a) {
  if (honest.has_truth()) return honest.truth();
  std::vector<Vector> out;
  out.reserve(a.file_count());
  for (FileId i = 0; i < a.file_count(); ++i) out.push_back(honest.value(a, a.workers_of(i).front(), i));
  return out;
}

}  // namespace detail

/// Colluding distorted value for file i. Batch-level statistics (ALIE, FoE)
/// are taken over all true file gradients.
class Distorter {
 public:
  Distorter(const DistortionMethod& m, const std::vector<Vector>& truth) : method_(m), truth_(truth) {
    const std::size_t d = truth.empty() ? 0 : truth.front().size();
    if (std::holds_alternative<Alie>(m) || std::holds_alternative<FallOfEmpires>(m)) {
      mean_.assign(d, 0.0);
      for (const auto& g : truth)
        for (std::size_t k = 0; k < d; ++k) mean_[k] += g[k];
      for (auto& v : mean_) v /= static_cast<double>(truth.size());
    }
    if (std::holds_alternative<Alie>(m)) {
      sd_.assign(d, 0.0);
      if (truth.size() > 1) {
        for (const auto& g : truth)
          for (std::size_t k = 0; k < d; ++k) sd_[k] += (g[k] - mean_[k]) * (g[k] - mean_[k]);
        for (auto& v : sd_) v = std::sqrt(v / static_cast<double>(truth.size() - 1));
      }
    }
  }

  Vector operator()(FileId i) const {
    const Vector& g = truth_.at(i);
    return std::visit(
        [&](const auto& x) -> Vector {
          using T = std::decay_t<decltype(x)>;
          Vector out(g.size());
          if constexpr (std::is_same_v<T, Reversed>) {
            for (std::size_t k = 0; k < g.size(); ++k) out[k] = -x.c * g[k];
          } else if constexpr (std::is_same_v<T, ConstantVector>) {
            if (x.value.size() != g.size())
              throw std::invalid_argument("constant distortion: dimension " + std::to_string(x.value.size()) +
                                          " does not match gradient dimension " + std::to_string(g.size()));
            out = x.value;
          } else if constexpr (std::is_same_v<T, Alie>) {
            for (std::size_t k = 0; k < g.size(); ++k) out[k] = mean_[k] + x.z * sd_[k];
          } else {
            for (std::size_t k = 0; k < g.size(); ++k) out[k] = -x.epsilon * mean_[k];
          }
          return out;
        },
        method_);
  }

 private:
  const DistortionMethod& method_;
  const std::vector<Vector>& truth_;
  Vector mean_;
  Vector sd_;
};

/// Applies the plan to an all-honest report. Honest workers' values are
/// never touched.
inline WorkerReport apply_attack(const AttackPlan& plan, const WorkerReport& honest, const Assignment& a) {
  WorkerReport out = honest;
  if (plan.kind == PlanKind::None || plan.adversaries.empty()) return out;
  const auto truth = detail::true_file_gradients(honest, a);
  const Distorter distort(plan.distortion, truth);
  for (FileId i = 0; i < a.file_count(); ++i) {
    if (!plan.distorts(a, i)) continue;
    const Vector bad = distort(i);
    for (Worker j : a.workers_of(i))
      if (plan.is_adversary(j)) out.set_value(a, j, i, bad);
  }
  return out;
}

/// Agreement graph the plan induces on the subset layout, derived from the
/// plan structure alone (no reports), for clusters too large to materialize.
/// Requires a weak plan or an optimal plan with one shared disagreement set.
/// Assumes the distorted value differs from the true one on every file.
inline AgreementGraph structural_agreement_graph(const ClusterParams& params, const AttackPlan& plan) {
  params.validate();
  const int K = params.K;
  const int r = params.r;
  const int q = static_cast<int>(plan.adversaries.size());
  AgreementGraph g = AgreementGraph::complete(K);
  if (plan.kind == PlanKind::None || q == 0) return g;

  WorkerSet shared_d;
  if (plan.kind == PlanKind::Optimal) {
    shared_d = plan.disagreement.at(plan.adversaries.front());
    for (const auto& [adv, d] : plan.disagreement)
      if (d != shared_d)
        throw std::invalid_argument("structural_agreement_graph: optimal plans need one shared disagreement set");
  }
  const int d_honest = static_cast<int>(
      std::count_if(shared_d.begin(), shared_d.end(), [&](Worker j) { return !plan.is_adversary(j); }));

  for (Worker a : plan.adversaries) {
    for (Worker h = 1; h <= K; ++h) {
      if (plan.is_adversary(h)) continue;
      bool disagree = false;
      if (plan.kind == PlanKind::Weak) {
        disagree = r >= 2;
      } else if (std::binary_search(shared_d.begin(), shared_d.end(), h)) {
        // A file {a, h, ...} is distorted iff it holds j >= r' adversaries
        // (a among them) and r - j honest members from D (h among them).
        for (int j = params.majority(); j <= r - 1 && !disagree; ++j)
          disagree = (j - 1 <= q - 1) && (r - j - 1 <= d_honest - 1);
      }
      if (disagree) g.disconnect(a, h);
    }
  }
  return g;
}

// JSON ----------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const DistortionMethod& m) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Reversed>) j = {{"method", "reversed"}, {"c", x.c}};
        else if constexpr (std::is_same_v<T, ConstantVector>) j = {{"method", "constant"}, {"value", x.value}};
        else if constexpr (std::is_same_v<T, Alie>) j = {{"method", "alie"}, {"z", x.z}};
        else j = {{"method", "foe"}, {"epsilon", x.epsilon}};
      },
      m);
}

inline void from_json(const nlohmann::json& j, DistortionMethod& m) {
  const auto name = j.value("method", std::string("reversed"));
  if (name == "reversed") m = Reversed{j.value("c", 1.0)};
  else if (name == "constant") m = ConstantVector{j.at("value").get<Vector>()};
  else if (name == "alie") m = Alie{j.value("z", 1.0)};
  else if (name == "foe") m = FallOfEmpires{j.value("epsilon", 1.0)};
  else throw std::invalid_argument("unknown distortion method '" + name + "'");
  validate(m);
}

inline void to_json(nlohmann::json& j, const AttackPlan& p) {
  nlohmann::json d = nlohmann::json::object();
  for (const auto& [adv, set] : p.disagreement) d[std::to_string(adv)] = set;
  j = nlohmann::json{{"kind", to_string(p.kind)},
                     {"adversaries", p.adversaries},
                     {"disagreement", std::move(d)},
                     {"distortion", p.distortion}};
}

inline void from_json(const nlohmann::json& j, AttackPlan& p) {
  const auto kind = j.value("kind", std::string("none"));
  if (kind == "none") p.kind = PlanKind::None;
  else if (kind == "weak") p.kind = PlanKind::Weak;
  else if (kind == "optimal") p.kind = PlanKind::Optimal;
  else throw std::invalid_argument("unknown plan kind '" + kind + "'");
  p.adversaries = j.value("adversaries", WorkerSet{});
  std::sort(p.adversaries.begin(), p.adversaries.end());
  p.disagreement.clear();
  if (j.contains("disagreement"))
    for (const auto& [key, set] : j.at("disagreement").items()) {
      auto s = set.get<WorkerSet>();
      std::sort(s.begin(), s.end());
      p.disagreement[std::stoi(key)] = std::move(s);
    }
  p.distortion = j.contains("distortion") ? j.at("distortion").get<DistortionMethod>() : DistortionMethod{Reversed{}};
  if (p.kind == PlanKind::Optimal)
    for (Worker a : p.adversaries)
      if (!p.disagreement.count(a))
        throw std::invalid_argument("optimal plan lacks a disagreement set for worker " + std::to_string(a));
}

}  // namespace aspis
