#include "treemove/replica.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace treemove {

std::ostream& operator<<(std::ostream& os, const MoveOp& op) {
  return os << "move<" << op.ts << ", " << to_string(op.n) << ", " << to_string(op.p) << '>';
}

NodeId find_last(const TreeState& state, NodeId n, NodeId p) {
  const TreeNode* node_n = state.find(n);
  if (node_n == nullptr) throw std::logic_error("find_last: unknown node " + to_string(n));
  Timestamp max_ts = node_n->ts;
  NodeId undo_node = n;
  std::size_t steps = 0;
  while (p != n) {
    if (p == root_id || ++steps > state.size()) {
      throw std::logic_error("find_last: " + to_string(n) + " is not an ancestor of the walk start");
    }
    const TreeNode* node = state.find(p);
    if (node == nullptr) throw std::logic_error("find_last: walk reached missing node " + to_string(p));
    if (node->ts > max_ts) {
      max_ts = node->ts;
      undo_node = p;
    }
    p = node->parent;
  }
  return undo_node;
}

Replica::Replica(ReplicaId id, ReplicaOptions options)
    : clock_(id), present_log_(options.max_previous_parents) {}

LocalApply Replica::apply_local(NodeId n, NodeId p) {
  if (is_sentinel(n)) throw std::invalid_argument("cannot move sentinel node " + to_string(n));
  if (!state_.contains(p)) throw std::invalid_argument("unknown parent " + to_string(p));

  const Timestamp ts = clock_.tick();
  const MoveOp op{ts, n, p};
  if (state_.check_cycle(n, p)) {
    ++suppressed_local_;
    return {op, false};
  }
  if (const TreeNode* node = state_.find(n)) present_log_.add(n, node->parent);
  state_.put(n, p, ts);
  outbox_.push_back(op);
  return {op, true};
}

NodeId Replica::pop_safe_previous_parent(NodeId undo_node, NodeId n, std::vector<NodeId>* rejected) {
  while (auto candidate = present_log_.pop(undo_node)) {
    // A parent that no longer exists cannot host the node.
    if (state_.contains(*candidate) && !state_.check_cycle(n, *candidate)) return *candidate;
    if (rejected) rejected->push_back(*candidate);
  }
  return conflict_id;
}

RemoteApplyOutcome Replica::apply_remote(const MoveOp& op) {
  if (is_sentinel(op.n)) throw std::invalid_argument("remote op moves sentinel node " + to_string(op.n));
  if (op.ts.counter == 0) throw std::invalid_argument("remote op carries a zero timestamp");

  RemoteApplyOutcome outcome;
  const TreeNode* node_n = state_.find(op.n);
  if (node_n != nullptr && op.ts <= node_n->ts) {
    // Older than (or identical to) the last op applied on n.
    outcome.stale_ignored = true;
    return outcome;
  }

  clock_.witness(op.ts);
  if (!state_.contains(op.p)) {
    // The parent's own insert has not arrived yet. Park it under CONFLICT with
    // the minimum timestamp so its real insert always wins.
    state_.put(op.p, conflict_id, Timestamp{});
  }
  if (node_n == nullptr) {
    // Never seen: no previous position to remember.
    state_.put(op.n, conflict_id, op.ts);
  } else {
    present_log_.add(op.n, node_n->parent);
    state_.put(op.n, node_n->parent, op.ts);
  }

  if (state_.check_cycle(op.n, op.p)) {
    outcome.cycle_detected = true;
    outcome.undo_node = find_last(state_, op.n, op.p);
    outcome.undo_parent = pop_safe_previous_parent(outcome.undo_node, op.n, &outcome.rejected_parents);
    const auto path = state_.path_to_root(outcome.undo_parent);
    outcome.undo_parent_safe = std::find(path.begin(), path.end(), op.n) == path.end();

    auto compensation = apply_local(outcome.undo_node, outcome.undo_parent);
    if (!compensation.applied) {
      throw std::logic_error("compensation for " + to_string(outcome.undo_node) + " was suppressed");
    }
    outcome.compensation = compensation.op;
    ++compensations_;
    if (outcome.undo_node == op.n) return outcome;
  }

  state_.put(op.n, op.p, op.ts);
  outcome.applied = true;
  return outcome;
}

std::vector<MoveOp> Replica::drain_outbox() {
  std::vector<MoveOp> out;
  out.swap(outbox_);
  return out;
}

}  // namespace treemove
