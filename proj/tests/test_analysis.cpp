#include <gtest/gtest.h>

#include "aspis/aspis.hpp"
#include "oracles.hpp"

using namespace aspis;

// Optimal count summed term by term: files with i >= r' adversaries and r - i
// members of D.
static std::uint64_t optimal_sum(int q, int r) {
  std::uint64_t c = 0;
  for (int i = (r + 1) / 2; i <= r; ++i) c += oracle::pascal(q, i) * oracle::pascal(q, r - i);
  return c;
}

TEST(ClosedForms, OptimalEqualsSummedCount) {
  for (int r : {3, 5, 7})
    for (int q = 0; q <= 20; ++q) EXPECT_EQ(binomial(2 * q, r) / 2, optimal_sum(q, r)) << r << ' ' << q;
}

TEST(ClosedForms, KnownCells) {
  EXPECT_EQ(epsilon_aspis_optimal(15, 3, 4).rounded(), "0.062");
  EXPECT_EQ(epsilon_aspis_weak(15, 3, 6).rounded(), "0.044");
  EXPECT_EQ(epsilon_detox(21, 3, 10, AttackMode::Weak).rounded(), "0.429");
  EXPECT_EQ(epsilon_aspis_optimal(24, 3, 11).rounded(), "0.380");
  EXPECT_EQ(epsilon_baseline(15, 4).rounded(), "0.267");
  EXPECT_EQ(epsilon_detox(15, 3, 4, AttackMode::Optimal).rounded(), "0.400");
  EXPECT_EQ(epsilon_aspis_weak(15, 3, 2).corrupted, 0u);
  EXPECT_THROW(epsilon_detox(14, 3, 2, AttackMode::Weak), std::invalid_argument);
  EXPECT_THROW(epsilon_aspis_optimal(14, 3, 7), std::invalid_argument);
}

TEST(EpsilonRecord, HalfUpRounding) {
  EpsilonRecord e;
  e.total = 2000;
  e.corrupted = 1;  // 0.0005
  EXPECT_EQ(e.rounded(), "0.001");
  e.corrupted = 0;
  EXPECT_EQ(e.rounded(), "0.000");
  e.total = 3;
  e.corrupted = 2;
  EXPECT_EQ(e.rounded(), "0.667");
  e.total = 1;
  e.corrupted = 1;
  EXPECT_EQ(e.rounded(), "1.000");
}

TEST(BruteForce, SmallInstancesMatchFormula) {
  for (int K = 3; K <= 8; ++K)
    for (int q = 1; 2 * q < K; ++q) EXPECT_EQ(brute_force_cmax(K, 3, q), binomial(2 * q, 3) / 2) << K << ' ' << q;
  EXPECT_EQ(brute_force_cmax(9, 5, 4), binomial(8, 5) / 2);
  EXPECT_EQ(brute_force_cmax(7, 3, 0), 0u);
}

TEST(BruteForce, GuardRefusesLargeSearch) {
  EXPECT_THROW(brute_force_cmax(13, 3, 6), InstanceTooLarge);
  EXPECT_THROW(brute_force_cmax(65, 3, 2), InstanceTooLarge);
  try {
    brute_force_cmax(11, 3, 5);
    FAIL();
  } catch (const InstanceTooLarge& e) {
    EXPECT_NE(std::string(e.what()).find("above the bound"), std::string::npos);
  }
}

TEST(Measure, PipelineMatchesClosedForms) {
  for (auto [K, r] : {std::pair{9, 3}, std::pair{15, 3}, std::pair{12, 5}}) {
    for (int q = 1; 2 * q < K; ++q) {
      const ClusterParams p{K, r, q};
      for (AttackMode m : {AttackMode::Weak, AttackMode::Optimal}) {
        const auto got = measure_epsilon(p, default_plan(Aggregator::Aspis, p, m), Aggregator::Aspis, 11);
        const auto want = m == AttackMode::Weak ? epsilon_aspis_weak(K, r, q) : epsilon_aspis_optimal(K, r, q);
        EXPECT_EQ(got.corrupted, want.corrupted) << K << ' ' << r << ' ' << q << ' ' << to_string(m);
        EXPECT_EQ(got.total, want.total);
        if (K % r == 0) {
          const auto d = measure_epsilon(p, default_plan(Aggregator::DetoxMoM, p, m), Aggregator::DetoxMoM, 11);
          EXPECT_EQ(d.corrupted, epsilon_detox(K, r, q, m).corrupted);
        }
      }
      const auto b = measure_epsilon(p, default_plan(Aggregator::BaselineMedian, p, AttackMode::Weak),
                                     Aggregator::BaselineMedian, 11);
      EXPECT_EQ(b.corrupted, static_cast<std::uint64_t>(q));
    }
  }
}

TEST(Measure, OutcomeAndGraphExposed) {
  const ClusterParams p{7, 3, 3};
  const auto m = run_measurement(p, optimal_plan(p, {1, 2, 3}, {4, 5, 6}, Reversed{}), Aggregator::Aspis, 1);
  ASSERT_TRUE(m.outcome.has_value());
  EXPECT_FALSE(is_detected(*m.outcome));
  ASSERT_TRUE(m.graph.has_value());
  EXPECT_EQ(m.graph->edges().size(), 12u);
}

TEST(Rows, CountsPerConfiguration) {
  EXPECT_EQ(epsilon_rows(15, 3, 2, 7).size(), 30u);
  EXPECT_EQ(epsilon_rows(25, 3, 2, 12).size(), 33u);  // no detox rows when r does not divide K
}
