#include "treemove/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace treemove {

TreeState::TreeState() {
  nodes_.emplace(root_id, TreeNode{root_id, Timestamp{}, root_id});
  nodes_.emplace(trash_id, TreeNode{trash_id, Timestamp{}, root_id});
  nodes_.emplace(conflict_id, TreeNode{conflict_id, Timestamp{}, root_id});
}

std::optional<TreeNode> TreeState::get_node(NodeId id) const {
  if (auto* node = find(id)) return *node;
  return std::nullopt;
}

const TreeNode* TreeState::find(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const TreeNode& TreeState::at(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw std::logic_error("tree walk reached missing node " + to_string(id));
  }
  return it->second;
}

void TreeState::put(NodeId id, NodeId parent, Timestamp ts) { nodes_[id] = TreeNode{id, ts, parent}; }

void TreeState::erase(NodeId id) { nodes_.erase(id); }

bool TreeState::check_cycle(NodeId n, NodeId p) const {
  std::size_t steps = 0;
  const std::size_t bound = nodes_.size() + 1;
  while (p != root_id) {
    if (p == n) return true;
    if (++steps > bound) throw std::logic_error("cycle in tree state above node " + to_string(n));
    p = at(p).parent;
  }
  return false;
}

bool TreeState::is_reachable_from_root(NodeId id) const {
  std::size_t steps = 0;
  const std::size_t bound = nodes_.size() + 1;
  while (id != root_id) {
    auto* node = find(id);
    if (node == nullptr || ++steps > bound) return false;
    id = node->parent;
  }
  return true;
}

std::vector<NodeId> TreeState::path_to_root(NodeId id) const {
  std::vector<NodeId> path{id};
  const std::size_t bound = nodes_.size() + 1;
  while (id != root_id) {
    id = at(id).parent;
    path.push_back(id);
    if (path.size() > bound) throw std::logic_error("cycle in tree state on path from " + to_string(path.front()));
  }
  return path;
}

std::vector<TreeNode> TreeState::sorted_nodes() const {
  std::vector<TreeNode> out;
  out.reserve(nodes_.size());
  for (const auto& [id, node] : nodes_) out.push_back(node);
  std::sort(out.begin(), out.end(), [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  return out;
}

std::string TreeState::serialize() const {
  std::string out;
  out.reserve(nodes_.size() * 24);
  char line[96];
  for (const auto& node : sorted_nodes()) {
    int len;
    if (node.id == root_id) {
      len = std::snprintf(line, sizeof line, "%llu - %llu %u\n", static_cast<unsigned long long>(raw(node.id)),
                          static_cast<unsigned long long>(node.ts.counter), raw(node.ts.replica));
    } else {
      len = std::snprintf(line, sizeof line, "%llu %llu %llu %u\n", static_cast<unsigned long long>(raw(node.id)),
                          static_cast<unsigned long long>(raw(node.parent)),
                          static_cast<unsigned long long>(node.ts.counter), raw(node.ts.replica));
    }
    out.append(line, static_cast<std::size_t>(len));
  }
  return out;
}

std::string TreeState::digest() const { return fnv1a_hex(serialize()); }

std::optional<TreeState> TreeState::parse(std::string_view text) {
  TreeState state;
  state.nodes_.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::uint64_t id = 0, counter = 0;
    std::uint32_t replica = 0;
    std::string parent;
    if (!(fields >> id >> parent >> counter >> replica)) return std::nullopt;
    NodeId parent_id = NodeId{id};
    if (parent != "-") {
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(parent.data(), parent.data() + parent.size(), value);
      if (ec != std::errc{} || ptr != parent.data() + parent.size()) return std::nullopt;
      parent_id = NodeId{value};
    }
    state.put(NodeId{id}, parent_id, Timestamp{counter, ReplicaId{replica}});
  }
  if (!state.contains(root_id)) return std::nullopt;
  return state;
}

std::optional<std::string> find_invariant_violation(const TreeState& state) {
  for (NodeId sentinel : {trash_id, conflict_id}) {
    auto* node = state.find(sentinel);
    if (node == nullptr || node->parent != root_id) {
      return "sentinel " + to_string(sentinel) + " is not a child of ROOT";
    }
  }
  // 0 = unvisited, 1 = on current walk, 2 = known to reach ROOT
  std::unordered_map<NodeId, std::uint8_t> mark;
  mark.reserve(state.size());
  mark[root_id] = 2;
  std::vector<NodeId> walk;
  for (const auto& [start, unused] : state) {
    walk.clear();
    NodeId id = start;
    while (true) {
      auto& m = mark[id];
      if (m == 2) break;
      if (m == 1) return "cycle through node " + to_string(id);
      auto* node = state.find(id);
      if (node == nullptr) return "node " + to_string(walk.back()) + " has missing parent " + to_string(id);
      m = 1;
      walk.push_back(id);
      id = node->parent;
    }
    for (NodeId visited : walk) mark[visited] = 2;
  }
  return std::nullopt;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string to_string(NodeId id) {
  switch (raw(id)) {
    case 0:
      return "ROOT";
    case 1:
      return "TRASH";
    case 2:
      return "CONFLICT";
    default:
      return std::to_string(raw(id));
  }
}

}  // namespace treemove
