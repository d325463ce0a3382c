#pragma once

#include <cstddef>
#include <vector>

#include "treemove/netsim.hpp"

namespace treemove {

/// Replica 0 inserts `tree_size` nodes (ids 3..) under ROOT at t=0. Once the
/// inserts have reached everyone, each replica issues `ops_per_replica`
/// moves at `rate` ops/s, picking n uniformly among the user nodes and p
/// uniformly among the user nodes plus ROOT and TRASH. Seeded by cfg.seed.
std::vector<SimEvent> random_workload(const SimConfig& cfg, std::size_t tree_size, std::size_t ops_per_replica,
                                      double rate);

/// Like random_workload, but user nodes are dealt round-robin to replicas and
/// each replica only moves its own nodes under ROOT, TRASH or another of its
/// own nodes that is not in the moved node's subtree. With FIFO channels
/// (cfg.reorder == false) every replica sees a prefix of each owner's
/// history, so no op is unsafe anywhere and no compensation ever occurs.
std::vector<SimEvent> conflict_free_workload(const SimConfig& cfg, std::size_t tree_size, std::size_t ops_per_replica,
                                             double rate);

}  // namespace treemove
