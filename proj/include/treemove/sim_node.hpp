#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treemove/move_op.hpp"
#include "treemove/replica.hpp"
#include "treemove/tree.hpp"

namespace treemove {

enum class Algorithm { proposed, baseline };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct RemoteStep {
  RemoteApplyOutcome outcome;  // baseline: only stale_ignored is meaningful
  std::size_t undo_redo_steps = 0;
};

/// Uniform face over the two replica implementations so the simulator and
/// the interleaving enumerator can drive either.
class SimNode {
 public:
  virtual ~SimNode() = default;

  virtual LocalApply generate(NodeId n, NodeId p) = 0;
  virtual RemoteStep receive(const MoveOp& op) = 0;
  virtual std::vector<MoveOp> drain() = 0;
  virtual const TreeState& tree() const = 0;
  virtual std::unique_ptr<SimNode> clone() const = 0;
  /// Full internal state (tree, clock, logs, outbox) as a string key.
  virtual std::string fingerprint() const = 0;
};

std::unique_ptr<SimNode> make_sim_node(Algorithm algorithm, ReplicaId id, std::size_t max_previous_parents);

}  // namespace treemove
