// Walks one iteration of the protocol on K=7, r=3 under both attack kinds and
// prints what the parameter server sees.

#include <cstdio>

#include "aspis/aspis.hpp"

using namespace aspis;

static void show(const char* title, const ClusterParams& p, const AttackPlan& plan) {
  const Assignment a = build_assignment(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 3, 7));
  const auto report = apply_attack(plan, honest, a);
  const auto g = build_agreement_graph(report, a);
  const auto outcome = classify(g, p.q);
  const auto res = aspis_aggregate(report, a, outcome);

  std::printf("%s\n  edges:", title);
  for (auto [u, v] : g.edges()) std::printf(" %d-%d", u, v);
  std::printf("\n  outcome: %s\n", outcome_tag(outcome));
  if (const auto* amb = std::get_if<Ambiguous>(&outcome)) {
    for (const auto& c : amb->maximum_cliques) {
      std::printf("  clique:");
      for (Worker w : c) std::printf(" %d", w);
      std::printf("\n");
    }
  }
  std::printf("  corrupted files: %zu of %llu\n\n", res.corrupted_files.size(),
              static_cast<unsigned long long>(a.file_count()));
}

int main() {
  const ClusterParams p{7, 3, 3};
  show("weak attack, adversaries {1,2,3}", p, weak_plan(p, {1, 2, 3}, Reversed{}));
  show("optimal attack, adversaries {1,2,3}, D = {4,5,6}", p, optimal_plan(p, {1, 2, 3}, {4, 5, 6}, Reversed{}));

  const auto eps = epsilon_aspis_optimal(15, 3, 4);
  std::printf("closed form, K=15 r=3 q=4 optimal: %llu/%llu = %s\n", static_cast<unsigned long long>(eps.corrupted),
              static_cast<unsigned long long>(eps.total), eps.rounded().c_str());
  return 0;
}
