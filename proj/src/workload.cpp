#include "treemove/workload.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace treemove {

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

SimTime settle_time(const SimConfig& cfg) {
  double worst = 10.0;
  for (const auto& row : cfg.latency_ms) {
    for (double v : row) worst = std::max(worst, v);
  }
  return static_cast<SimTime>(std::llround((worst + cfg.jitter_ms + 1.0) * 1000.0));
}

std::vector<SimEvent> initial_inserts(std::size_t tree_size) {
  std::vector<SimEvent> events;
  for (std::size_t i = 0; i < tree_size; ++i) {
    events.push_back(SimEvent{0, ReplicaId{0}, GenerateEvent{NodeId{first_user_id + i}, root_id}});
  }
  return events;
}

SimTime interval_us(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("op rate must be positive");
  return std::max<SimTime>(1, static_cast<SimTime>(std::llround(1e6 / rate)));
}

}  // namespace

std::vector<SimEvent> random_workload(const SimConfig& cfg, std::size_t tree_size, std::size_t ops_per_replica,
                                      double rate) {
  if (tree_size == 0) throw std::invalid_argument("tree_size must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  auto events = initial_inserts(tree_size);
  const SimTime start = settle_time(cfg);
  const SimTime step = interval_us(rate);
  for (std::size_t k = 0; k < ops_per_replica; ++k) {
    for (std::uint32_t r = 0; r < cfg.replicas; ++r) {
      const NodeId n{first_user_id + pick(rng, tree_size)};
      const std::uint64_t slot = pick(rng, tree_size + 2);
      const NodeId p = slot == tree_size ? root_id : slot == tree_size + 1 ? trash_id : NodeId{first_user_id + slot};
      events.push_back(SimEvent{start + static_cast<SimTime>(k) * step, ReplicaId{r}, GenerateEvent{n, p}});
    }
  }
  return events;
}

std::vector<SimEvent> conflict_free_workload(const SimConfig& cfg, std::size_t tree_size, std::size_t ops_per_replica,
                                             double rate) {
  if (tree_size == 0) throw std::invalid_argument("tree_size must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  auto events = initial_inserts(tree_size);
  const SimTime start = settle_time(cfg);
  const SimTime step = interval_us(rate);

  // Generator-side model of each replica's own nodes. Nobody else moves them,
  // so the owner's view of their ancestry is authoritative.
  std::unordered_map<std::uint64_t, std::uint64_t> parent;  // raw ids
  std::vector<std::vector<std::uint64_t>> owned(cfg.replicas);
  for (std::size_t i = 0; i < tree_size; ++i) {
    parent[first_user_id + i] = raw(root_id);
    owned[i % cfg.replicas].push_back(first_user_id + i);
  }
  auto in_subtree = [&](std::uint64_t node, std::uint64_t candidate) {
    for (std::uint64_t cur = candidate; cur >= first_user_id; cur = parent.at(cur)) {
      if (cur == node) return true;
    }
    return false;
  };

  for (std::size_t k = 0; k < ops_per_replica; ++k) {
    for (std::uint32_t r = 0; r < cfg.replicas; ++r) {
      const auto& mine = owned[r];
      if (mine.empty()) continue;
      const std::uint64_t n = mine[pick(rng, mine.size())];
      std::vector<std::uint64_t> targets{raw(root_id), raw(trash_id)};
      for (std::uint64_t candidate : mine) {
        if (!in_subtree(n, candidate)) targets.push_back(candidate);
      }
      const std::uint64_t p = targets[pick(rng, targets.size())];
      parent[n] = p;
      events.push_back(SimEvent{start + static_cast<SimTime>(k) * step, ReplicaId{r}, GenerateEvent{NodeId{n}, NodeId{p}}});
    }
  }
  return events;
}

}  // namespace treemove
