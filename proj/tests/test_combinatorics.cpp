#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "aspis/combinatorics.hpp"
#include "oracles.hpp"

using namespace aspis;

TEST(Binomial, MatchesPascalTriangle) {
  for (int n = 0; n <= 40; ++n)
    for (int k = -1; k <= n + 1; ++k) EXPECT_EQ(binomial(n, k), oracle::pascal(n, k)) << n << ' ' << k;
}

TEST(Binomial, KnownValues) {
  EXPECT_EQ(binomial(15, 3), 455u);
  EXPECT_EQ(binomial(21, 3), 1330u);
  EXPECT_EQ(binomial(24, 3), 2024u);
  EXPECT_EQ(binomial(100, 5), 75287520u);
  EXPECT_EQ(binomial(-3, 1), 0u);
}

TEST(Binomial, OverflowIsReported) { EXPECT_THROW(binomial(200, 100), std::overflow_error); }

// Colex order: compare subsets by their largest element first.
static bool colex_less(const WorkerSet& a, const WorkerSet& b) {
  return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

TEST(SubsetRank, AgreesWithSortedColexEnumeration) {
  for (int K = 1; K <= 9; ++K) {
    for (int r = 1; r <= K; ++r) {
      std::vector<WorkerSet> all;
      for_each_subset(1, K, r, [&](const WorkerSet& s) { all.push_back(s); });
      ASSERT_EQ(all.size(), oracle::pascal(K, r));
      std::sort(all.begin(), all.end(), colex_less);
      for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(subset_rank(all[i], K, r), i);
        EXPECT_EQ(subset_unrank(i, K, r), all[i]);
      }
    }
  }
}

TEST(SubsetRank, RoundTripLargeCluster) {
  const int K = 100, r = 5;
  const FileId f = binomial(K, r);
  for (FileId id : {FileId{0}, FileId{1}, f / 3, f / 2, f - 2, f - 1}) {
    const auto s = subset_unrank(id, K, r);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(subset_rank(s, K, r), id);
  }
}

TEST(SubsetRank, RejectsMalformedInput) {
  EXPECT_THROW(subset_rank(WorkerSet{1, 1, 2}, 5, 3), std::invalid_argument);
  EXPECT_THROW(subset_rank(WorkerSet{3, 2, 1}, 5, 3), std::invalid_argument);
  EXPECT_THROW(subset_rank(WorkerSet{1, 2, 6}, 5, 3), std::invalid_argument);
  EXPECT_THROW(subset_rank(WorkerSet{1, 2}, 5, 3), std::invalid_argument);
  EXPECT_THROW(subset_unrank(10, 5, 3), std::invalid_argument);
}

TEST(ForEachSubset, LexicographicAndComplete) {
  std::vector<WorkerSet> seen;
  for_each_subset(3, 7, 2, [&](const WorkerSet& s) { seen.push_back(s); });
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  EXPECT_EQ(seen.front(), (WorkerSet{3, 4}));
  EXPECT_EQ(seen.back(), (WorkerSet{6, 7}));
  int calls = 0;
  for_each_subset(1, 4, 0, [&](const WorkerSet& s) {
    EXPECT_TRUE(s.empty());
    ++calls;
  });
  EXPECT_EQ(calls, 1);
}
