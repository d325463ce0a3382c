#include <gtest/gtest.h>

#include "treemove/exhaustive.hpp"

using namespace treemove;

TEST(Exhaustive, CrossingMovesUnderFifoChannels) {
  const auto res = exhaustive_interleavings(crossing_moves_instance());
  ASSERT_EQ(res.digests.size(), 1u);
  EXPECT_EQ(res.divergent_terminals, 0u);
  EXPECT_TRUE(res.violations.empty());
}

TEST(Exhaustive, CrossingMovesUnderArbitraryOrderAgreeOnShape) {
  // Which replica stamps the winning compensation depends on the order, so
  // timestamps may differ between executions; the shape does not.
  const auto res = exhaustive_interleavings(crossing_moves_instance(), Algorithm::proposed, 5, 200'000, false);
  EXPECT_EQ(res.shapes.size(), 1u);
  EXPECT_EQ(res.divergent_terminals, 0u);
  EXPECT_GT(res.terminals, 1u);
}

TEST(Exhaustive, DisjointMovesGiveTheSequentialResult) {
  const NodeId a{3}, b{4}, c{5}, d{6};
  InterleavingInstance inst{{{a, root_id}, {b, root_id}, {c, root_id}, {d, root_id}}, {{{a, b}}, {{c, d}}}};
  const auto res = exhaustive_interleavings(inst, Algorithm::proposed, 5, 200'000, false);
  ASSERT_EQ(res.shapes.size(), 1u);
  // Sequential result: a under b, c under d.
  TreeState seq;
  seq.put(a, b, Timestamp{5, ReplicaId{0}});
  seq.put(b, root_id, Timestamp{2, ReplicaId{0}});
  seq.put(c, d, Timestamp{5, ReplicaId{1}});
  seq.put(d, root_id, Timestamp{4, ReplicaId{0}});
  EXPECT_EQ(*res.digests.begin(), seq.digest());
}

TEST(Exhaustive, BaselineIsOrderIndependent) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto res = exhaustive_interleavings(random_instance(seed, 2, 2, 4), Algorithm::baseline, 5, 200'000, false);
    ASSERT_EQ(res.digests.size(), 1u) << "seed " << seed;
    ASSERT_TRUE(res.violations.empty());
  }
}

TEST(Exhaustive, ReplicasAgreeInEveryTerminalState) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto res = exhaustive_interleavings(random_instance(seed, 2, 2, 4), Algorithm::proposed, 5, 200'000, false);
    ASSERT_EQ(res.divergent_terminals, 0u) << "seed " << seed;
    ASSERT_TRUE(res.violations.empty());
  }
}

TEST(Exhaustive, Guards) {
  EXPECT_THROW(exhaustive_interleavings(random_instance(0, 4, 1, 3)), std::invalid_argument);
  EXPECT_THROW(exhaustive_interleavings(random_instance(0, 2, 5, 3)), std::invalid_argument);
  EXPECT_THROW(exhaustive_interleavings(random_instance(0, 3, 3, 4), Algorithm::proposed, 5, 10, false),
               std::runtime_error);
  EXPECT_THROW(random_instance(0, 2, 1, 0), std::invalid_argument);
}
