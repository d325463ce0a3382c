#pragma once

#include <map>
#include <random>
#include <set>
#include <vector>

#include "treemove/move_op.hpp"
#include "treemove/netsim.hpp"
#include "treemove/tree.hpp"

namespace treemove::oracle {

// Random recursive tree over user ids 3..3+size-1, each hung under ROOT or an
// earlier node. Timestamps are distinct and increasing.
inline TreeState random_tree(std::mt19937_64& rng, std::size_t size) {
  TreeState state;
  for (std::size_t i = 0; i < size; ++i) {
    const std::uint64_t slot = rng() % (i + 1);
    const NodeId parent = slot == i ? root_id : NodeId{first_user_id + slot};
    state.put(NodeId{first_user_id + i}, parent, Timestamp{i + 1, ReplicaId{0}});
  }
  return state;
}

// Every node below `n` (inclusive), found by scanning child links downward.
inline std::set<NodeId> subtree_of(const TreeState& state, NodeId n) {
  std::set<NodeId> out{n};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [id, node] : state) {
      if (id != root_id && out.count(node.parent) && out.insert(id).second) grew = true;
    }
  }
  return out;
}

// Final (parent, ts) per node from the max-timestamp op on that node.
inline std::map<NodeId, MoveOp> lww_fold(const std::vector<MoveOp>& ops) {
  std::map<NodeId, MoveOp> winner;
  for (const auto& op : ops) {
    auto [it, fresh] = winner.emplace(op.n, op);
    if (!fresh && op.ts > it->second.ts) it->second = op;
  }
  return winner;
}

}  // namespace treemove::oracle
