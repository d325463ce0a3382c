#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "treemove/move_op.hpp"
#include "treemove/replica.hpp"
#include "treemove/sim_node.hpp"
#include "treemove/tree.hpp"

namespace treemove {

/// Simulated time in microseconds.
using SimTime = std::int64_t;

using LatencyMatrix = std::vector<std::vector<double>>;  // milliseconds

LatencyMatrix uniform_latency(std::size_t replicas, double ms);

/// US East / West Europe / Southeast Asia round figures used for the
/// geo-replication experiments.
LatencyMatrix geo_latency();

struct SimConfig {
  std::size_t replicas = 3;
  Algorithm algorithm = Algorithm::proposed;
  std::uint64_t seed = 1;
  LatencyMatrix latency_ms;  // empty: 10 ms between every pair
  /// true: each message independently delayed by latency + jitter, so a
  /// channel may reorder within the jitter window. false: per-channel FIFO.
  bool reorder = true;
  double jitter_ms = 0.0;
  std::size_t max_previous_parents = 5;
  std::size_t max_events = 20'000'000;
  bool measure_time = true;
};

/// Throws std::invalid_argument unless the latency matrix is square,
/// symmetric, non-negative and zero on the diagonal.
void validate(const SimConfig& cfg);

struct GenerateEvent {
  NodeId n{};
  NodeId p{};
};

struct DeliverEvent {
  MoveOp op;
};

struct SimEvent {
  SimTime at = 0;
  ReplicaId replica{};
  std::variant<GenerateEvent, DeliverEvent> action;
};

struct TimingStats {
  std::size_t count = 0;
  double mean_us = 0.0;
  double p99_us = 0.0;

  static TimingStats from_samples(std::vector<double> samples);
};

struct ReplicaReport {
  ReplicaId id{};
  std::size_t generated = 0;   // local ops applied and broadcast
  std::size_t suppressed = 0;  // local ops that failed the cycle check
  std::size_t rejected = 0;    // local ops naming an unknown parent
  std::size_t received = 0;
  std::size_t stale = 0;
  std::size_t cycles = 0;
  std::size_t compensations = 0;
  std::size_t undo_redo_steps = 0;
  TimingStats local;
  TimingStats remote;
  std::string digest;
};

struct SimReport {
  Algorithm algorithm = Algorithm::proposed;
  std::vector<ReplicaReport> replicas;
  bool converged = false;
  std::size_t events = 0;
  SimTime finished_at = 0;
  /// Every op that entered the network: applied local ops and compensations.
  std::vector<MoveOp> broadcast_ops;
  std::vector<TreeState> final_states;
};

/// Passed to the observer after every single op application.
struct ApplyTrace {
  ReplicaId replica{};
  bool remote = false;
  MoveOp op;
  bool local_applied = false;
  const RemoteStep* step = nullptr;  // remote applications only
  std::size_t emitted = 0;           // ops queued for broadcast by this application
  const TreeState& state;
};

using ApplyObserver = std::function<void(const ApplyTrace&)>;

/// Runs the script to quiescence. Every op leaving a replica is delivered to
/// every other replica after its channel delay. Deterministic for a given
/// (cfg, script) apart from the wall-clock timing fields. Throws
/// std::runtime_error if cfg.max_events is exceeded.
SimReport run_scenario(const SimConfig& cfg, const std::vector<SimEvent>& script, const ApplyObserver& observer = {});

nlohmann::json to_json(const SimReport& report);

/// Columns: replica,op_kind,count,mean_us,p99_us,compensations. For the
/// baseline the last column carries undo+redo steps.
std::string metrics_csv(const SimReport& report);

}  // namespace treemove
