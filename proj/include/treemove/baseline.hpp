#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "treemove/clock.hpp"
#include "treemove/move_op.hpp"
#include "treemove/replica.hpp"
#include "treemove/tree.hpp"

namespace treemove {

/// One op in the undo-redo log, with the state needed to revert it.
struct LogEntry {
  MoveOp op;
  std::optional<NodeId> old_parent;  // nullopt: n did not exist before
  Timestamp old_ts;
  bool applied = false;              // false: skipped as unsafe
  bool created_parent = false;       // op.p was parked under CONFLICT
};

/// Comparison algorithm: every replica keeps all ops sorted by timestamp.
/// A remote op older than the log tail forces the newer suffix to be undone,
/// the op applied in place, and the suffix redone. Unsafe moves (self-moves,
/// moves under a descendant) are kept in the log but skipped, and safety is
/// re-evaluated on every redo.
class BaselineReplica {
 public:
  explicit BaselineReplica(ReplicaId id);

  /// Throws std::invalid_argument for a sentinel `n` or an unknown `p`.
  /// The op is broadcast even when skipped.
  LocalApply apply_local(NodeId n, NodeId p);
  LocalApply remove(NodeId n) { return apply_local(n, trash_id); }

  /// Returns the number of undo plus redo steps this op cost. Duplicate
  /// timestamps are ignored.
  std::size_t apply_remote(const MoveOp& op);

  std::vector<MoveOp> drain_outbox();

  ReplicaId id() const { return clock_.replica(); }
  const LamportClock& clock() const { return clock_; }
  const TreeState& state() const { return state_; }
  const std::vector<LogEntry>& log() const { return log_; }
  std::size_t undo_redo_count() const { return undo_redo_count_; }

 private:
  void do_op(LogEntry& entry);
  void undo_op(const LogEntry& entry);

  LamportClock clock_;
  TreeState state_;
  std::vector<LogEntry> log_;
  std::vector<MoveOp> outbox_;
  std::size_t undo_redo_count_ = 0;
};

}  // namespace treemove
