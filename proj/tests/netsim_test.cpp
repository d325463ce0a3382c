#include <gtest/gtest.h>

#include <map>

#include "treemove/netsim.hpp"
#include "treemove/scenario.hpp"
#include "treemove/workload.hpp"

using namespace treemove;

namespace {

Timestamp ts(std::uint64_t c, std::uint32_t r) { return Timestamp{c, ReplicaId{r}}; }

SimConfig quiet(SimConfig cfg) {
  cfg.measure_time = false;
  return cfg;
}

}  // namespace

TEST(Netsim, Fig1ConvergesToTheWorkedExampleTree) {
  const auto sc = *bundled_scenario("fig1");
  const auto report = run_scenario(sc.config, sc.events);
  ASSERT_TRUE(report.converged);
  const NodeId a = sc.node("a"), b = sc.node("b");
  for (const auto& s : report.final_states) {
    EXPECT_EQ(s.find(b)->parent, root_id);
    EXPECT_EQ(s.find(b)->ts, ts(8, 1));
    EXPECT_EQ(s.find(a)->parent, b);
    EXPECT_EQ(s.find(a)->ts, ts(6, 0));
    EXPECT_FALSE(find_invariant_violation(s));
  }
  EXPECT_EQ(report.replicas[0].compensations + report.replicas[1].compensations, 2u);
}

TEST(Netsim, Exp2PicksYAndItsFirstSafeParent) {
  const auto sc = *bundled_scenario("exp2");
  std::vector<RemoteApplyOutcome> cycles;
  const auto report = run_scenario(sc.config, sc.events, [&](const ApplyTrace& t) {
    if (t.remote && raw(t.replica) == 0 && t.step->outcome.cycle_detected) cycles.push_back(t.step->outcome);
  });
  ASSERT_TRUE(report.converged);
  ASSERT_EQ(cycles.size(), 1u);
  const auto& out = cycles[0];
  EXPECT_EQ(out.undo_node, sc.node("y"));
  EXPECT_EQ(out.rejected_parents, (std::vector<NodeId>{sc.node("n"), sc.node("z")}));
  EXPECT_EQ(out.undo_parent, sc.node("c"));
  EXPECT_TRUE(out.applied);
  const auto& s = report.final_states[0];
  EXPECT_EQ(s.find(sc.node("a"))->parent, sc.node("x"));
  EXPECT_EQ(s.find(sc.node("y"))->parent, sc.node("c"));
}

TEST(Netsim, SingleReplicaNeverCompensates) {
  SimConfig cfg = quiet({});
  cfg.replicas = 1;
  const auto report = run_scenario(cfg, random_workload(cfg, 10, 200, 1000));
  EXPECT_TRUE(report.converged);
  EXPECT_EQ(report.replicas[0].compensations, 0u);
  EXPECT_EQ(report.replicas[0].received, 0u);
}

TEST(Netsim, DeterministicForFixedSeed) {
  SimConfig cfg = quiet({});
  cfg.seed = 17;
  cfg.jitter_ms = 30;
  const auto script = random_workload(cfg, 12, 150, 2000);
  const auto r1 = run_scenario(cfg, script);
  const auto r2 = run_scenario(cfg, script);
  EXPECT_EQ(r1.broadcast_ops, r2.broadcast_ops);
  EXPECT_EQ(to_json(r1).dump(), to_json(r2).dump());
  EXPECT_TRUE(r1.converged);
}

TEST(Netsim, FifoModeKeepsChannelOrder) {
  SimConfig cfg = quiet({});
  cfg.reorder = false;
  cfg.jitter_ms = 50;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Timestamp> last;
  bool ordered = true;
  run_scenario(cfg, random_workload(cfg, 10, 100, 2000), [&](const ApplyTrace& t) {
    if (!t.remote) return;
    auto& prev = last[{raw(t.op.ts.replica), raw(t.replica)}];
    if (t.op.ts < prev) ordered = false;
    prev = t.op.ts;
  });
  EXPECT_TRUE(ordered);
}

TEST(Netsim, ReorderModeActuallyReorders) {
  SimConfig cfg = quiet({});
  cfg.jitter_ms = 50;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Timestamp> last;
  std::size_t inversions = 0;
  run_scenario(cfg, random_workload(cfg, 10, 100, 2000), [&](const ApplyTrace& t) {
    if (!t.remote) return;
    auto& prev = last[{raw(t.op.ts.replica), raw(t.replica)}];
    if (t.op.ts < prev) ++inversions;
    prev = std::max(prev, t.op.ts);
  });
  EXPECT_GT(inversions, 0u);
}

TEST(Netsim, ValidateRejectsBadMatrices) {
  SimConfig cfg;
  cfg.replicas = 2;
  cfg.latency_ms = {{0, 1}, {2, 0}};
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg.latency_ms = {{1, 1}, {1, 0}};
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg.latency_ms = {{0, 1}};
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg.latency_ms = geo_latency();
  cfg.replicas = 3;
  EXPECT_NO_THROW(validate(cfg));
  cfg.replicas = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(Netsim, EventBoundAborts) {
  SimConfig cfg = quiet({});
  cfg.max_events = 10;
  EXPECT_THROW(run_scenario(cfg, random_workload(cfg, 10, 10, 100)), std::runtime_error);
}

TEST(TimingStats, MeanAndNearestRankP99) {
  std::vector<double> samples;
  for (int i = 1; i <= 100; ++i) samples.push_back(i);
  const auto s = TimingStats::from_samples(samples);
  EXPECT_EQ(s.count, 100u);
  EXPECT_DOUBLE_EQ(s.mean_us, 50.5);
  EXPECT_DOUBLE_EQ(s.p99_us, 99.0);
  EXPECT_EQ(TimingStats::from_samples({}).count, 0u);
  EXPECT_DOUBLE_EQ(TimingStats::from_samples({4.0}).p99_us, 4.0);
}

TEST(Netsim, MetricsCsvLayout) {
  const auto sc = *bundled_scenario("fig1");
  const auto csv = metrics_csv(run_scenario(sc.config, sc.events));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "replica,op_kind,count,mean_us,p99_us,compensations");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Workload, ShapeAndDeterminism) {
  SimConfig cfg;
  cfg.seed = 4;
  const auto w = random_workload(cfg, 7, 20, 500);
  ASSERT_EQ(w.size(), 7u + 20u * 3u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(w[i].at, 0);
    EXPECT_EQ(raw(w[i].replica), 0u);
    EXPECT_EQ(std::get<GenerateEvent>(w[i].action).p, root_id);
  }
  for (std::size_t i = 7; i < w.size(); ++i) {
    const auto& g = std::get<GenerateEvent>(w[i].action);
    EXPECT_GE(raw(g.n), first_user_id);
    EXPECT_LT(raw(g.n), first_user_id + 7);
    EXPECT_TRUE(g.p == root_id || g.p == trash_id || (raw(g.p) >= first_user_id && raw(g.p) < first_user_id + 7));
  }
  EXPECT_EQ(w[7 + 3].at - w[7].at, 2000);  // 500 ops/s
  const auto again = random_workload(cfg, 7, 20, 500);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(std::get<GenerateEvent>(w[i].action).n, std::get<GenerateEvent>(again[i].action).n);
  }
  EXPECT_THROW(random_workload(cfg, 0, 1, 500), std::invalid_argument);
  EXPECT_THROW(random_workload(cfg, 3, 1, 0), std::invalid_argument);
}

TEST(Workload, ConflictFreeMovesOnlyOwnNodes) {
  SimConfig cfg;
  const auto w = conflict_free_workload(cfg, 9, 30, 500);
  for (std::size_t i = 9; i < w.size(); ++i) {
    const auto& g = std::get<GenerateEvent>(w[i].action);
    EXPECT_EQ((raw(g.n) - first_user_id) % 3, raw(w[i].replica));
    if (!is_sentinel(g.p)) EXPECT_EQ((raw(g.p) - first_user_id) % 3, raw(w[i].replica));
  }
}

TEST(Scenario, ParsesDirectivesAndAliases) {
  const auto sc = parse_scenario(R"(name demo
replicas 3
latency-row 0 0 5 7
latency-row 1 5 0 9
latency-row 2 7 9 0
jitter 2.5
reorder off
seed 99
m 3
node top 10
0 generate 0 top root   # insert
1.5 generate 1 11 top
3 deliver 2 4 1 11 trash
)");
  EXPECT_EQ(sc.name, "demo");
  EXPECT_EQ(sc.config.replicas, 3u);
  EXPECT_EQ(sc.config.latency_ms[2][1], 9.0);
  EXPECT_EQ(sc.config.jitter_ms, 2.5);
  EXPECT_FALSE(sc.config.reorder);
  EXPECT_EQ(sc.config.seed, 99u);
  EXPECT_EQ(sc.config.max_previous_parents, 3u);
  EXPECT_EQ(sc.node("top"), NodeId{10});
  ASSERT_EQ(sc.events.size(), 3u);
  EXPECT_EQ(sc.events[1].at, 1500);
  const auto& d = std::get<DeliverEvent>(sc.events[2].action);
  EXPECT_EQ(d.op, (MoveOp{ts(4, 1), NodeId{11}, trash_id}));
  const auto again = parse_scenario(format_scenario(sc));
  EXPECT_EQ(format_scenario(again), format_scenario(sc));
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  auto line_of = [](const char* text) {
    try {
      parse_scenario(text);
    } catch (const ScenarioError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("replicas 2\nbogus 1\n"), 2u);
  EXPECT_EQ(line_of("replicas 2\n\n0 generate 5 3 root\n"), 3u);
  EXPECT_EQ(line_of("0 generate 0 nosuch root\n"), 1u);
  EXPECT_EQ(line_of("reorder maybe\n"), 1u);
  EXPECT_EQ(line_of("replicas 2\nlatency -3\n"), 2u);
}

TEST(Scenario, BundledNames) {
  for (const auto& name : bundled_scenario_names()) EXPECT_TRUE(bundled_scenario(name)) << name;
  EXPECT_FALSE(bundled_scenario("nope"));
}
