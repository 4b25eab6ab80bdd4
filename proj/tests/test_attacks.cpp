#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "aspis/aspis.hpp"
#include "oracles.hpp"

using namespace aspis;

static WorkerSet random_subset(int K, int size, std::mt19937_64& rng, const WorkerSet& exclude = {}) {
  WorkerSet pool;
  for (Worker j = 1; j <= K; ++j)
    if (std::find(exclude.begin(), exclude.end(), j) == exclude.end()) pool.push_back(j);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

// The closed-form graph must agree with the graph built from actual reports.
TEST(StructuralGraph, MatchesReportGraph) {
  std::mt19937_64 rng(99);
  for (int K : {5, 7, 8, 9, 11}) {
    for (int r : {3, 5}) {
      if (r > K) continue;
      for (int q = 0; 2 * q < K; ++q) {
        const ClusterParams p{K, r, q};
        const Assignment a = build_assignment(p);
        const auto honest = honest_report(a, random_file_gradients(a.file_count(), 2, 17));
        for (int rep = 0; rep < 3; ++rep) {
          const auto A = random_subset(K, q, rng);
          const auto D = random_subset(K, q, rng, A);
          for (const auto& plan : {weak_plan(p, A, Reversed{}), optimal_plan(p, A, D, Reversed{})}) {
            const auto from_reports = build_agreement_graph(apply_attack(plan, honest, a), a);
            const auto structural = structural_agreement_graph(p, plan);
            EXPECT_EQ(structural.edges(), from_reports.edges())
                << "K=" << K << " r=" << r << " q=" << q << " kind=" << to_string(plan.kind);
          }
        }
      }
    }
  }
}

TEST(OptimalPlan, DistortsHalfOfC2qR) {
  std::mt19937_64 rng(5);
  for (int K : {7, 9, 15}) {
    for (int r : {3, 5}) {
      for (int q = 1; 2 * q < K; ++q) {
        const ClusterParams p{K, r, q};
        const Assignment a = build_assignment(p);
        const auto A = random_subset(K, q, rng);
        const auto plan = optimal_plan(p, A, Reversed{});
        std::uint64_t distorted = 0;
        for (FileId i = 0; i < a.file_count(); ++i) distorted += plan.distorts(a, i);
        EXPECT_EQ(distorted, oracle::pascal(2 * q, r) / 2) << K << ' ' << r << ' ' << q;
      }
    }
  }
}

TEST(WeakPlan, DistortsEveryFileTouched) {
  const ClusterParams p{9, 3, 3};
  const Assignment a = build_assignment(p);
  const auto plan = weak_plan(p, {2, 5, 9}, Reversed{});
  std::uint64_t distorted = 0;
  for (FileId i = 0; i < a.file_count(); ++i) distorted += plan.distorts(a, i);
  // files avoiding all three adversaries are the only clean ones
  EXPECT_EQ(distorted, oracle::pascal(9, 3) - oracle::pascal(6, 3));
}

TEST(Plans, Validation) {
  const ClusterParams p{9, 3, 3};
  EXPECT_THROW(weak_plan(p, {1, 2}, Reversed{}), std::invalid_argument);
  EXPECT_THROW(weak_plan(p, {1, 1, 2}, Reversed{}), std::invalid_argument);
  EXPECT_THROW(weak_plan(p, {1, 2, 10}, Reversed{}), std::invalid_argument);
  EXPECT_THROW(optimal_plan(p, {1, 2, 3}, {3, 4, 5}, Reversed{}), std::invalid_argument);
  EXPECT_THROW(optimal_plan(p, {1, 2, 3}, {4, 5}, Reversed{}), std::invalid_argument);
  EXPECT_THROW(weak_plan(p, {1, 2, 3}, Reversed{-1.0}), std::invalid_argument);
  EXPECT_EQ(default_disagreement_set(p, {2, 4, 6}), (WorkerSet{1, 3, 5}));
  EXPECT_EQ(weak_plan({9, 3, 0}, {}, Reversed{}).kind, PlanKind::None);
}

TEST(Distortion, ValuesPerMethod) {
  const ClusterParams p{3, 3, 1};
  const Assignment a = build_assignment(p);
  ASSERT_EQ(a.file_count(), 1u);
  const auto honest = honest_report(a, {{2.0, -4.0}});
  auto bad = [&](DistortionMethod m) {
    return apply_attack(weak_plan(p, {2}, std::move(m)), honest, a).value(a, 2, 0);
  };
  EXPECT_EQ(bad(Reversed{}), (Vector{-2.0, 4.0}));
  EXPECT_EQ(bad(Reversed{3.0}), (Vector{-6.0, 12.0}));
  EXPECT_EQ(bad(ConstantVector{{7.0, 8.0}}), (Vector{7.0, 8.0}));
  EXPECT_EQ(bad(FallOfEmpires{0.5}), (Vector{-1.0, 2.0}));
  // one file: sample standard deviation is taken as 0
  EXPECT_EQ(bad(Alie{2.0}), (Vector{2.0, -4.0}));
  EXPECT_THROW(bad(ConstantVector{{1.0}}), std::invalid_argument);
}

TEST(Distortion, AlieUsesMeanAndSampleDeviation) {
  const ClusterParams p{5, 3, 1};
  const Assignment a = build_assignment(p);
  std::vector<Vector> g(a.file_count());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = {static_cast<double>(i)};
  const auto honest = honest_report(a, g);
  const auto out = apply_attack(weak_plan(p, {1}, Alie{1.5}), honest, a);
  // values 0..9: mean 4.5, sample variance 55/6
  const double expect = 4.5 + 1.5 * std::sqrt(55.0 / 6.0);
  for (FileId i : a.files_of(1)) EXPECT_NEAR(out.value(a, 1, i)[0], expect, 1e-12);
  for (FileId i : a.files_of(2))
    EXPECT_EQ(out.value(a, 2, i)[0], static_cast<double>(i));  // honest copies untouched
}

TEST(Distortion, CollusionSharesOneValuePerFile) {
  const ClusterParams p{7, 3, 3};
  const Assignment a = build_assignment(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 3, 2));
  const auto out = apply_attack(weak_plan(p, {1, 2, 3}, Reversed{}), honest, a);
  for (FileId i = 0; i < a.file_count(); ++i) {
    const auto& w = a.workers_of(i);
    if (w[0] == 1 && w[1] == 2) {
      EXPECT_EQ(out.value(a, 1, i), out.value(a, 2, i));
    }
  }
}

TEST(DetoxPlacement, OptimalFillsGroupsWeakRoundRobin) {
  EXPECT_EQ(detox_adversary_choice(15, 3, 4, AttackMode::Optimal), (WorkerSet{1, 2, 4, 5}));
  EXPECT_EQ(detox_adversary_choice(15, 3, 5, AttackMode::Optimal), (WorkerSet{1, 2, 4, 5, 7}));
  EXPECT_EQ(detox_adversary_choice(15, 3, 6, AttackMode::Weak), (WorkerSet{1, 2, 4, 7, 10, 13}));
  EXPECT_THROW(detox_adversary_choice(14, 3, 4, AttackMode::Weak), std::invalid_argument);
}

TEST(AttackPlan, JsonRoundTrip) {
  const ClusterParams p{9, 3, 3};
  for (const auto& plan : {weak_plan(p, {1, 4, 7}, Alie{0.7}), optimal_plan(p, {2, 3, 4}, FallOfEmpires{2.0})}) {
    nlohmann::json j = plan;
    const auto back = j.get<AttackPlan>();
    EXPECT_EQ(back.kind, plan.kind);
    EXPECT_EQ(back.adversaries, plan.adversaries);
    EXPECT_EQ(back.disagreement, plan.disagreement);
    EXPECT_EQ(nlohmann::json(back.distortion), nlohmann::json(plan.distortion));
  }
  EXPECT_THROW((nlohmann::json{{"kind", "sneaky"}}.get<AttackPlan>()), std::invalid_argument);
}
