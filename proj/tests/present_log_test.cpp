#include <gtest/gtest.h>

#include "treemove/present_log.hpp"

using namespace treemove;

namespace {
const NodeId x{3}, p1{4}, p2{5}, p3{6};
}

TEST(PresentLog, MostRecentFirstAndUnique) {
  PresentLog log(3);
  log.add(x, p1);
  log.add(x, p2);
  log.add(x, p1);
  EXPECT_EQ(log.entries(x), (std::deque<NodeId>{p1, p2}));
}

TEST(PresentLog, EvictsOldestPastCapacity) {
  PresentLog log(2);
  log.add(x, p1);
  log.add(x, p2);
  log.add(x, p3);
  EXPECT_EQ(log.entries(x), (std::deque<NodeId>{p3, p2}));
}

TEST(PresentLog, PopDrainsInOrder) {
  PresentLog log;
  log.add(x, p1);
  log.add(x, p2);
  EXPECT_EQ(log.pop(x), p2);
  EXPECT_EQ(log.pop(x), p1);
  EXPECT_FALSE(log.pop(x));
  EXPECT_TRUE(log.entries(x).empty());
  EXPECT_FALSE(log.pop(p3));
}

TEST(PresentLog, ZeroCapacityKeepsNothing) {
  PresentLog log(0);
  log.add(x, p1);
  EXPECT_FALSE(log.pop(x));
}

TEST(PresentLog, DefaultCapacityIsFive) {
  PresentLog log;
  EXPECT_EQ(log.capacity(), 5u);
  for (std::uint64_t i = 0; i < 8; ++i) log.add(x, NodeId{10 + i});
  EXPECT_EQ(log.entries(x).size(), 5u);
  EXPECT_EQ(log.entries(x).front(), NodeId{17});
}
