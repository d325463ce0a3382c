#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "treemove/clock.hpp"
#include "treemove/move_op.hpp"
#include "treemove/present_log.hpp"
#include "treemove/tree.hpp"

namespace treemove {

struct ReplicaOptions {
  /// Previous parents remembered per node.
  std::size_t max_previous_parents = 5;
};

struct LocalApply {
  MoveOp op;
  /// False when the local cycle check suppressed the move. Suppressed ops are
  /// not broadcast.
  bool applied = false;
};

struct RemoteApplyOutcome {
  bool applied = false;  // n now sits under op.p with op.ts
  bool stale_ignored = false;
  bool cycle_detected = false;
  std::optional<MoveOp> compensation;
  NodeId undo_node{};
  NodeId undo_parent{};
  /// Previous parents popped and rejected before undo_parent was chosen.
  std::vector<NodeId> rejected_parents;
  /// undo_parent re-checked against the subtree of n by an explicit
  /// path walk at selection time.
  bool undo_parent_safe = true;
};

/// Node with the highest timestamp on the walk from `p` up to `n` inclusive.
/// Requires `n` to be an ancestor of (or equal to) `p`.
NodeId find_last(const TreeState& state, NodeId n, NodeId p);

/// One replica of the tree running the compensation-based move protocol.
///
/// Not thread-safe: the owner serializes every call (one op applied at a
/// time), which is the replica-wide exclusion the protocol requires.
class Replica {
 public:
  explicit Replica(ReplicaId id, ReplicaOptions options = {});

  /// Stamps a fresh timestamp and applies move(n, p) unless it would close a
  /// cycle locally. Creates `n` under `p` when `n` is unknown (insert).
  /// Throws std::invalid_argument for a sentinel `n` or an unknown `p`.
  LocalApply apply_local(NodeId n, NodeId p);

  /// Soft delete: move under TRASH.
  LocalApply remove(NodeId n) { return apply_local(n, trash_id); }

  /// Last-writer-wins application of a move received from another replica.
  /// A move that would close a cycle triggers exactly one compensation: the
  /// newest node on the cycle goes back to a safe previous parent (or under
  /// CONFLICT) with a fresh timestamp, which is queued for broadcast.
  /// Throws std::invalid_argument for a malformed op.
  RemoteApplyOutcome apply_remote(const MoveOp& op);

  /// Pops previous parents of `undo_node`, most recent first, until one is not
  /// in the subtree of `n`. Falls back to CONFLICT.
  NodeId pop_safe_previous_parent(NodeId undo_node, NodeId n, std::vector<NodeId>* rejected = nullptr);

  /// Ops waiting for broadcast, in generation order.
  std::vector<MoveOp> drain_outbox();
  std::size_t outbox_size() const { return outbox_.size(); }

  ReplicaId id() const { return clock_.replica(); }
  const LamportClock& clock() const { return clock_; }
  const TreeState& state() const { return state_; }
  const PresentLog& present_log() const { return present_log_; }

  std::size_t suppressed_local() const { return suppressed_local_; }
  std::size_t compensations() const { return compensations_; }

 private:
  LamportClock clock_;
  TreeState state_;
  PresentLog present_log_;
  std::vector<MoveOp> outbox_;
  std::size_t suppressed_local_ = 0;
  std::size_t compensations_ = 0;
};

}  // namespace treemove
