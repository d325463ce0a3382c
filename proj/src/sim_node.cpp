#include "treemove/sim_node.hpp"

#include <algorithm>
#include <utility>

#include "treemove/baseline.hpp"

namespace treemove {

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::proposed ? "proposed" : "baseline";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "proposed") return Algorithm::proposed;
  if (name == "baseline") return Algorithm::baseline;
  return std::nullopt;
}

namespace {

void append_op(std::string& out, const MoveOp& op) {
  out += std::to_string(op.ts.counter);
  out += '.';
  out += std::to_string(raw(op.ts.replica));
  out += ':';
  out += std::to_string(raw(op.n));
  out += '>';
  out += std::to_string(raw(op.p));
  out += ';';
}

class ProposedNode final : public SimNode {
 public:
  ProposedNode(ReplicaId id, std::size_t m) : replica_(id, ReplicaOptions{m}) {}

  LocalApply generate(NodeId n, NodeId p) override { return replica_.apply_local(n, p); }
  RemoteStep receive(const MoveOp& op) override { return {replica_.apply_remote(op), 0}; }
  std::vector<MoveOp> drain() override { return replica_.drain_outbox(); }
  const TreeState& tree() const override { return replica_.state(); }
  std::unique_ptr<SimNode> clone() const override { return std::make_unique<ProposedNode>(*this); }

  std::string fingerprint() const override {
    std::string out = replica_.state().serialize();
    out += "clock " + std::to_string(replica_.clock().time()) + '\n';
    std::vector<std::pair<NodeId, const std::deque<NodeId>*>> logs;
    for (const auto& [node, list] : replica_.present_log()) logs.emplace_back(node, &list);
    std::sort(logs.begin(), logs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [node, list] : logs) {
      out += std::to_string(raw(node)) + ':';
      for (NodeId parent : *list) out += std::to_string(raw(parent)) + ',';
      out += '\n';
    }
    return out;
  }

 private:
  Replica replica_;
};

class BaselineNode final : public SimNode {
 public:
  explicit BaselineNode(ReplicaId id) : replica_(id) {}

  LocalApply generate(NodeId n, NodeId p) override { return replica_.apply_local(n, p); }

  RemoteStep receive(const MoveOp& op) override {
    RemoteStep step;
    const std::size_t before = replica_.log().size();
    step.undo_redo_steps = replica_.apply_remote(op);
    step.outcome.stale_ignored = replica_.log().size() == before;
    step.outcome.applied = !step.outcome.stale_ignored;
    return step;
  }

  std::vector<MoveOp> drain() override { return replica_.drain_outbox(); }
  const TreeState& tree() const override { return replica_.state(); }
  std::unique_ptr<SimNode> clone() const override { return std::make_unique<BaselineNode>(*this); }

  std::string fingerprint() const override {
    std::string out = replica_.state().serialize();
    out += "clock " + std::to_string(replica_.clock().time()) + '\n';
    for (const auto& entry : replica_.log()) append_op(out, entry.op);
    return out;
  }

 private:
  BaselineReplica replica_;
};

}  // namespace

std::unique_ptr<SimNode> make_sim_node(Algorithm algorithm, ReplicaId id, std::size_t max_previous_parents) {
  if (algorithm == Algorithm::baseline) return std::make_unique<BaselineNode>(id);
  return std::make_unique<ProposedNode>(id, max_previous_parents);
}

}  // namespace treemove
