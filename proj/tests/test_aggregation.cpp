#include <gtest/gtest.h>

#include "aspis/aspis.hpp"
#include "oracles.hpp"

using namespace aspis;

TEST(MajorityVote, StrictMajorityWins) {
  const std::vector<Vector> v{{1, 2}, {3, 4}, {1, 2}};
  EXPECT_EQ(majority_vote(v), (Vector{1, 2}));
}

TEST(MajorityVote, TieBrokenByByteOrder) {
  // positive doubles order like their bit patterns, so 1.0 beats 2.0
  const std::vector<Vector> v{{2.0}, {1.0}, {5.0}, {5.0}, {1.0}, {2.0}};
  EXPECT_EQ(majority_vote(v), (Vector{1.0}));
  const std::vector<Vector> w{{3.0}, {4.0}};
  EXPECT_EQ(majority_vote(w), (Vector{3.0}));
}

TEST(MajorityVote, ToleranceMergesNearValues) {
  const std::vector<Vector> v{{1.0}, {1.0 + 1e-12}, {7.0}};
  EXPECT_EQ(majority_vote(v, 1e-9), (Vector{1.0}));
  EXPECT_THROW(majority_vote(std::vector<Vector>{{1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST(CoordinateMedian, OddAndEven) {
  EXPECT_EQ(coordinate_median(std::vector<Vector>{{1, 9}, {5, 3}, {3, 7}}), (Vector{3, 7}));
  EXPECT_EQ(coordinate_median(std::vector<Vector>{{1, 10}, {4, 2}, {2, 0}, {8, 6}}), (Vector{3, 4}));
}

TEST(MedianOfMeans, GroupsConsecutiveInputs) {
  const std::vector<Vector> v{{0}, {2}, {10}, {12}, {100}, {-100}};
  EXPECT_EQ(median_of_means(v, 2), (Vector{1}));  // means 1, 11, 0
  EXPECT_EQ(median_of_means(v, 1), coordinate_median(v));
  EXPECT_THROW(median_of_means(v, 4), std::invalid_argument);
}

TEST(MultiKrum, HandComputedScores) {
  // q = 1 so each score sums 2 neighbours: 0 -> 5, 1 -> 2, 2 -> 5, outliers huge
  const std::vector<Vector> v{{0}, {1}, {2}, {100}, {-100}};
  EXPECT_EQ(multi_krum(v, 1, 1), (Vector{1}));
  EXPECT_EQ(multi_krum(v, 1, 3), (Vector{1}));
  EXPECT_THROW(multi_krum(v, 2, 1), InapplicableError);
  EXPECT_THROW(multi_krum(v, 1, 5), std::invalid_argument);
}

TEST(Bulyan, HandComputedSelection) {
  // Krum rounds pick 2, 1, 3, 0, 4; median 2; the 3 closest are 2, 1, 3
  const std::vector<Vector> v{{0}, {1}, {2}, {3}, {4}, {100}, {-100}};
  EXPECT_EQ(bulyan(v, 1), (Vector{2}));
  EXPECT_THROW(bulyan(v, 2), InapplicableError);
}

TEST(AspisAggregate, DetectedUsesLowestHonestCopyAndDropsCoveredFiles) {
  const ClusterParams p{7, 3, 3};
  const Assignment a = build_assignment(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 2, 4));
  const auto report = apply_attack(weak_plan(p, {1, 2, 3}, Reversed{}), honest, a);
  const auto out = detect(report, a);
  ASSERT_TRUE(is_detected(out));
  const auto res = aspis_aggregate(report, a, out);
  EXPECT_EQ(res.corrupted_files, (std::set<FileId>{0}));  // {1,2,3}
  EXPECT_EQ(res.used_files.size(), 34u);
  std::vector<Vector> kept;
  for (FileId i = 1; i < a.file_count(); ++i) kept.push_back(honest.truth()[i]);
  EXPECT_EQ(res.gradient, detail::mean_of(kept));
}

TEST(AspisAggregate, AmbiguousFallsBackToVoteAndMedian) {
  const ClusterParams p{7, 3, 3};
  const Assignment a = build_assignment(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 2, 4));
  const auto report = apply_attack(optimal_plan(p, {1, 2, 3}, {4, 5, 6}, Reversed{}), honest, a);
  const auto out = detect(report, a);
  ASSERT_FALSE(is_detected(out));
  const auto res = aspis_aggregate(report, a, out);
  EXPECT_EQ(res.corrupted_files.size(), oracle::pascal(6, 3) / 2);
  std::vector<Vector> winners;
  for (FileId i = 0; i < a.file_count(); ++i) {
    std::vector<Vector> copies;
    for (Worker j : a.workers_of(i)) copies.push_back(report.value(a, j, i));
    winners.push_back(majority_vote(copies));
  }
  EXPECT_EQ(res.gradient, coordinate_median(winners));
}

TEST(AspisAggregate, HonestRunAveragesEveryFile) {
  const Assignment a = build_assignment({9, 3, 0});
  const auto truth = random_file_gradients(a.file_count(), 3, 8);
  const auto honest = honest_report(a, truth);
  const auto res = aspis_aggregate(honest, a, detect(honest, a));
  EXPECT_TRUE(res.corrupted_files.empty());
  EXPECT_EQ(res.gradient, detail::mean_of(truth));
}

TEST(DetoxAggregate, OptimalPlacementCorruptsFilledGroups) {
  const ClusterParams p{15, 3, 4};
  const Assignment a = Assignment::groups(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 2, 1));
  const auto adv = detox_adversary_choice(15, 3, 4, AttackMode::Optimal);
  const auto res = detox_aggregate(apply_attack(distort_all_plan(p, adv, Reversed{}), honest, a), a);
  EXPECT_EQ(res.corrupted_files, (std::set<FileId>{0, 1}));
  EXPECT_THROW(detox_aggregate(honest, build_assignment(p)), std::invalid_argument);
}

TEST(BaselineAggregate, Dispatch) {
  const ClusterParams p{15, 3, 4};
  const Assignment a = Assignment::per_worker(p);
  const auto honest = honest_report(a, random_file_gradients(a.file_count(), 2, 3));
  const auto report = apply_attack(distort_all_plan(p, {1, 2, 3, 4}, Reversed{}), honest, a);
  const auto med = baseline_aggregate(Aggregator::BaselineMedian, report, a);
  EXPECT_EQ(med.corrupted_files.size(), 4u);
  std::vector<Vector> inputs;
  for (FileId i = 0; i < a.file_count(); ++i) inputs.push_back(report.value(a, static_cast<Worker>(i + 1), i));
  EXPECT_EQ(med.gradient, coordinate_median(inputs));
  EXPECT_EQ(baseline_aggregate(Aggregator::MultiKrum, report, a).gradient, multi_krum(inputs, 4, 1));
  EXPECT_THROW(baseline_aggregate(Aggregator::Bulyan, report, a), InapplicableError);
  EXPECT_EQ(parse_aggregator(to_string(Aggregator::DetoxMoM)), Aggregator::DetoxMoM);
  EXPECT_THROW(parse_aggregator("trimmed"), std::invalid_argument);
}
