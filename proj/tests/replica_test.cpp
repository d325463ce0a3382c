#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "treemove/replica.hpp"

using namespace treemove;

namespace {

const NodeId a{3}, b{4};

Timestamp ts(std::uint64_t c, std::uint32_t r) { return Timestamp{c, ReplicaId{r}}; }

void deliver_all(Replica& from, Replica& to) {
  for (const auto& op : from.drain_outbox()) to.apply_remote(op);
}

// Two replicas sharing r->{a, b} (plus fillers so clocks reach 5), then the
// crossing moves <6,a,b> at r0 and <7,b,a> at r1.
struct Crossing : ::testing::Test {
  Replica c1{ReplicaId{0}}, c2{ReplicaId{1}};
  MoveOp move_ab, move_ba;

  void SetUp() override {
    c1.apply_local(a, root_id);
    c1.apply_local(b, root_id);
    for (std::uint64_t f = 5; f <= 7; ++f) c1.apply_local(NodeId{f}, root_id);
    deliver_all(c1, c2);
    c2.apply_local(NodeId{8}, root_id);  // clock 6 at r1
    move_ba = c2.apply_local(b, a).op;
    move_ab = c1.apply_local(a, b).op;
  }
};

}  // namespace

TEST_F(Crossing, TimestampsMatchTheWorkedExample) {
  EXPECT_EQ(move_ab, (MoveOp{ts(6, 0), a, b}));
  EXPECT_EQ(move_ba, (MoveOp{ts(7, 1), b, a}));
  EXPECT_EQ(c1.state().find(a)->parent, b);
  EXPECT_EQ(c2.state().find(b)->parent, a);
}

TEST_F(Crossing, OriginOfTheOlderMoveRejectsTheNewerOne) {
  const auto out = c1.apply_remote(move_ba);
  EXPECT_TRUE(out.cycle_detected);
  EXPECT_EQ(out.undo_node, b);
  EXPECT_EQ(out.undo_parent, root_id);
  ASSERT_TRUE(out.compensation);
  EXPECT_EQ(*out.compensation, (MoveOp{ts(8, 0), b, root_id}));
  EXPECT_FALSE(out.applied);
  EXPECT_EQ(c1.state().find(b)->parent, root_id);
  EXPECT_EQ(c1.state().find(a)->parent, b);
}

TEST_F(Crossing, OtherReplicaMovesBBackThenAppliesA) {
  const auto out = c2.apply_remote(move_ab);
  EXPECT_TRUE(out.cycle_detected);
  EXPECT_EQ(out.undo_node, b);
  EXPECT_EQ(out.undo_parent, root_id);
  EXPECT_TRUE(out.applied);
  EXPECT_EQ(c2.state().find(a)->parent, b);
  EXPECT_EQ(c2.state().find(b)->parent, root_id);
}

TEST_F(Crossing, ConvergesWithHighestCompensationWinning) {
  c1.apply_remote(move_ba);
  c2.apply_remote(move_ab);
  // Everything else each side queued: the insert of node 8 and the compensations.
  for (const auto& op : c1.drain_outbox()) {
    if (op != move_ab) c2.apply_remote(op);
  }
  for (const auto& op : c2.drain_outbox()) {
    if (op != move_ba) c1.apply_remote(op);
  }
  EXPECT_EQ(c1.outbox_size() + c2.outbox_size(), 0u);
  EXPECT_EQ(c1.state().serialize(), c2.state().serialize());
  EXPECT_EQ(c1.state().find(b)->parent, root_id);
  EXPECT_EQ(c1.state().find(b)->ts, ts(8, 1));
  EXPECT_EQ(c1.state().find(a)->parent, b);
  EXPECT_EQ(c1.state().find(a)->ts, ts(6, 0));
}

TEST(Replica, LocalMoveAndInsert) {
  Replica r(ReplicaId{0});
  const auto ins = r.apply_local(NodeId{42}, root_id);
  EXPECT_TRUE(ins.applied);
  EXPECT_EQ(r.state().find(NodeId{42})->parent, root_id);
  EXPECT_EQ(r.state().find(NodeId{42})->ts, ins.op.ts);
  EXPECT_EQ(r.drain_outbox(), std::vector<MoveOp>{ins.op});
  EXPECT_EQ(r.outbox_size(), 0u);
}

TEST(Replica, SelfMoveAndDescendantMoveAreSuppressedAndNotSent) {
  Replica r(ReplicaId{0});
  r.apply_local(a, root_id);
  r.apply_local(b, a);
  r.drain_outbox();
  EXPECT_FALSE(r.apply_local(a, a).applied);
  EXPECT_FALSE(r.apply_local(a, b).applied);
  EXPECT_EQ(r.outbox_size(), 0u);
  EXPECT_EQ(r.suppressed_local(), 2u);
  EXPECT_EQ(r.state().find(a)->parent, root_id);
}

TEST(Replica, RejectsSentinelsAndUnknownParents) {
  Replica r(ReplicaId{0});
  EXPECT_THROW(r.apply_local(conflict_id, root_id), std::invalid_argument);
  EXPECT_THROW(r.apply_local(a, NodeId{99}), std::invalid_argument);
  EXPECT_THROW(r.apply_remote(MoveOp{ts(3, 1), trash_id, root_id}), std::invalid_argument);
  EXPECT_THROW(r.apply_remote(MoveOp{ts(0, 1), a, root_id}), std::invalid_argument);
}

TEST(Replica, DeleteKeepsSubtreeAndCanBeUndone) {
  Replica r(ReplicaId{0});
  r.apply_local(a, root_id);
  r.apply_local(b, a);
  r.remove(a);
  EXPECT_EQ(r.state().find(a)->parent, trash_id);
  EXPECT_EQ(r.state().find(b)->parent, a);
  EXPECT_TRUE(r.state().is_reachable_from_root(b));
  r.apply_local(a, root_id);
  EXPECT_EQ(r.state().find(a)->parent, root_id);
}

TEST(Replica, StaleAndDuplicateRemoteOpsAreIgnored) {
  Replica r(ReplicaId{0});
  const MoveOp newer{ts(5, 1), a, root_id};
  EXPECT_TRUE(r.apply_remote(newer).applied);
  EXPECT_TRUE(r.apply_remote(newer).stale_ignored);
  const auto out = r.apply_remote(MoveOp{ts(4, 2), a, trash_id});
  EXPECT_TRUE(out.stale_ignored);
  EXPECT_EQ(r.state().find(a)->parent, root_id);
  EXPECT_TRUE(r.present_log().entries(a).empty());
  EXPECT_EQ(r.outbox_size(), 0u);
  EXPECT_EQ(r.clock().time(), 5u);
}

TEST(Replica, UnknownParentIsParkedUntilItsInsertArrives) {
  Replica r(ReplicaId{0});
  r.apply_remote(MoveOp{ts(2, 1), a, b});
  EXPECT_EQ(r.state().find(a)->parent, b);
  EXPECT_EQ(r.state().find(b)->parent, conflict_id);
  EXPECT_EQ(r.state().find(b)->ts, Timestamp{});
  EXPECT_FALSE(find_invariant_violation(r.state()));
  r.apply_remote(MoveOp{ts(1, 1), b, root_id});
  EXPECT_EQ(r.state().find(b)->parent, root_id);
  EXPECT_TRUE(r.present_log().entries(a).empty());
}

TEST(Replica, PopSafePreviousParentSkipsUnsafeEntries) {
  // a -> n -> y, plus z under a and c under ROOT; y's log holds n, z, c with
  // c the oldest.
  const NodeId n{4}, c{5}, z{6}, y{8};
  Replica r(ReplicaId{0});
  r.apply_local(a, root_id);
  r.apply_local(n, a);
  r.apply_local(c, root_id);
  r.apply_local(z, a);
  r.apply_local(y, c);
  r.apply_local(y, z);
  r.apply_local(y, n);
  EXPECT_EQ(r.present_log().entries(y), (std::deque<NodeId>{z, c}));
  std::vector<NodeId> rejected;
  EXPECT_EQ(r.pop_safe_previous_parent(y, a, &rejected), c);
  EXPECT_EQ(rejected, std::vector<NodeId>{z});
  EXPECT_EQ(r.pop_safe_previous_parent(y, a), conflict_id);
}

TEST(Replica, DeletedPreviousParentIsStillUsable) {
  Replica r(ReplicaId{0});
  const NodeId old{5};
  r.apply_local(a, root_id);
  r.apply_local(old, root_id);
  r.apply_local(b, old);
  r.apply_local(b, a);
  r.remove(old);
  EXPECT_EQ(r.pop_safe_previous_parent(b, a), old);
}

TEST(FindLast, WorkedExamplePath) {
  TreeState s;
  s.put(b, root_id, ts(7, 1));
  s.put(a, b, ts(6, 0));
  EXPECT_EQ(find_last(s, b, a), b);
  EXPECT_THROW(find_last(s, a, root_id), std::logic_error);
}

TEST(FindLast, MatchesBruteForceMaxOverPath) {
  std::mt19937_64 rng(5);
  for (int run = 0; run < 300; ++run) {
    const std::size_t size = 2 + rng() % 10;
    TreeState s = oracle::random_tree(rng, size);
    // Shuffle timestamps so the maximum lands anywhere.
    for (std::size_t i = 0; i < size; ++i) {
      const NodeId id{first_user_id + i};
      s.put(id, s.find(id)->parent, ts(1 + rng() % 50, static_cast<std::uint32_t>(rng() % 3)));
    }
    for (std::size_t i = 0; i < size; ++i) {
      const NodeId p{first_user_id + i};
      const auto path = s.path_to_root(p);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const NodeId n = path[k];
        NodeId best = n;
        for (std::size_t j = 0; j <= k; ++j) {
          if (s.find(path[j])->ts > s.find(best)->ts) best = path[j];
        }
        EXPECT_EQ(find_last(s, n, p), best);
      }
    }
  }
}

TEST(Replica, CompensationBudgetAndSafetyUnderRandomDelivery) {
  std::mt19937_64 rng(9);
  for (int run = 0; run < 200; ++run) {
    std::vector<Replica> reps;
    for (std::uint32_t i = 0; i < 3; ++i) reps.emplace_back(ReplicaId{i});
    for (std::uint64_t i = 0; i < 6; ++i) reps[0].apply_local(NodeId{first_user_id + i}, root_id);
    const auto inserts = reps[0].drain_outbox();
    for (std::size_t i = 1; i < 3; ++i) {
      for (const auto& op : inserts) reps[i].apply_remote(op);
    }
    struct Msg {
      std::size_t to;
      MoveOp op;
    };
    std::vector<Msg> pending;
    auto flush = [&](std::size_t from) {
      for (const auto& op : reps[from].drain_outbox()) {
        for (std::size_t to = 0; to < 3; ++to) {
          if (to != from) pending.push_back({to, op});
        }
      }
    };
    for (int step = 0; step < 60 || !pending.empty(); ++step) {
      if (step < 60 && rng() % 2) {
        const std::size_t r = rng() % 3;
        const NodeId n{first_user_id + rng() % 6};
        const std::uint64_t slot = rng() % 7;
        reps[r].apply_local(n, slot == 6 ? root_id : NodeId{first_user_id + slot});
        flush(r);
      } else if (!pending.empty()) {
        const std::size_t i = rng() % pending.size();
        const Msg m = pending[i];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
        const auto out = reps[m.to].apply_remote(m.op);
        ASSERT_EQ(out.compensation.has_value(), out.cycle_detected);
        ASSERT_EQ(reps[m.to].outbox_size(), out.compensation ? 1u : 0u);
        ASSERT_TRUE(out.undo_parent_safe);
        ASSERT_FALSE(find_invariant_violation(reps[m.to].state()));
        flush(m.to);
      }
    }
    EXPECT_EQ(reps[0].state().serialize(), reps[1].state().serialize());
    EXPECT_EQ(reps[0].state().serialize(), reps[2].state().serialize());
  }
}
