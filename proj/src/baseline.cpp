#include "treemove/baseline.hpp"

#include <algorithm>
#include <stdexcept>

namespace treemove {

BaselineReplica::BaselineReplica(ReplicaId id) : clock_(id) {}

void BaselineReplica::do_op(LogEntry& entry) {
  const MoveOp& op = entry.op;
  entry.created_parent = !state_.contains(op.p);
  if (entry.created_parent) state_.put(op.p, conflict_id, Timestamp{});

  const TreeNode* node = state_.find(op.n);
  entry.applied = !is_sentinel(op.n) && op.n != op.p && !(node != nullptr && state_.check_cycle(op.n, op.p));
  if (!entry.applied) return;
  if (node != nullptr) {
    entry.old_parent = node->parent;
    entry.old_ts = node->ts;
  } else {
    entry.old_parent.reset();
    entry.old_ts = Timestamp{};
  }
  state_.put(op.n, op.p, op.ts);
}

void BaselineReplica::undo_op(const LogEntry& entry) {
  if (entry.applied) {
    if (entry.old_parent) {
      state_.put(entry.op.n, *entry.old_parent, entry.old_ts);
    } else {
      state_.erase(entry.op.n);
    }
  }
  if (entry.created_parent) state_.erase(entry.op.p);
}

LocalApply BaselineReplica::apply_local(NodeId n, NodeId p) {
  if (is_sentinel(n)) throw std::invalid_argument("cannot move sentinel node " + to_string(n));
  if (!state_.contains(p)) throw std::invalid_argument("unknown parent " + to_string(p));

  LogEntry entry;
  entry.op = MoveOp{clock_.tick(), n, p};
  do_op(entry);
  log_.push_back(entry);
  outbox_.push_back(entry.op);
  return {entry.op, entry.applied};
}

std::size_t BaselineReplica::apply_remote(const MoveOp& op) {
  if (is_sentinel(op.n)) throw std::invalid_argument("remote op moves sentinel node " + to_string(op.n));
  if (op.ts.counter == 0) throw std::invalid_argument("remote op carries a zero timestamp");

  auto pos = std::lower_bound(log_.begin(), log_.end(), op.ts,
                              [](const LogEntry& e, const Timestamp& ts) { return e.op.ts < ts; });
  if (pos != log_.end() && pos->op.ts == op.ts) return 0;
  clock_.witness(op.ts);

  const auto index = static_cast<std::size_t>(pos - log_.begin());
  const std::size_t suffix = log_.size() - index;
  for (std::size_t i = log_.size(); i > index; --i) undo_op(log_[i - 1]);

  LogEntry entry;
  entry.op = op;
  log_.insert(log_.begin() + static_cast<std::ptrdiff_t>(index), entry);
  for (std::size_t i = index; i < log_.size(); ++i) do_op(log_[i]);

  const std::size_t steps = 2 * suffix;
  undo_redo_count_ += steps;
  return steps;
}

std::vector<MoveOp> BaselineReplica::drain_outbox() {
  std::vector<MoveOp> out;
  out.swap(outbox_);
  return out;
}

}  // namespace treemove
