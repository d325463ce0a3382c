#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "treemove/sim_node.hpp"
#include "treemove/tree.hpp"

namespace treemove {

using MoveRequest = std::pair<NodeId, NodeId>;  // (n, p)

/// A tiny concurrent history. `initial` is inserted by replica 0 and
/// delivered everywhere before anything else happens; then every replica
/// issues its `moves` locally, concurrently, before receiving anything.
struct InterleavingInstance {
  std::vector<MoveRequest> initial;
  std::vector<std::vector<MoveRequest>> moves;  // one list per replica
};

struct ExhaustiveResult {
  /// Final tree digests over every replica of every delivery order.
  /// Convergence holds iff this is a singleton.
  std::set<std::string> digests;
  /// Same, but over parent links only (timestamps dropped).
  std::set<std::string> shapes;
  std::size_t states = 0;
  std::size_t terminals = 0;
  /// Terminal states in which the replicas disagree.
  std::size_t divergent_terminals = 0;
  /// Tree invariant violations seen in any intermediate state.
  std::vector<std::string> violations;
};

/// Explores every order in which the pending messages (including the
/// compensations they trigger) can be delivered, deduplicating identical
/// global states. Throws std::invalid_argument for instances above
/// 3 replicas or 4 moves per replica, and std::runtime_error once
/// `max_states` distinct states have been visited.
ExhaustiveResult exhaustive_interleavings(const InterleavingInstance& instance, Algorithm algorithm = Algorithm::proposed,
                                          std::size_t max_previous_parents = 5, std::size_t max_states = 200'000,
                                          bool fifo = true);

/// The crossing-moves example: tree r->{a=3, b=4}; replica 0 moves a under
/// b while replica 1 moves b under a.
InterleavingInstance crossing_moves_instance();

/// Random tree of `tree_size` user nodes and `moves_per_replica` random
/// moves per replica over the user nodes, ROOT and TRASH.
InterleavingInstance random_instance(std::uint64_t seed, std::size_t replicas, std::size_t moves_per_replica,
                                     std::size_t tree_size);

}  // namespace treemove
