#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treemove/clock.hpp"

namespace treemove {

enum class NodeId : std::uint64_t {};

constexpr std::uint64_t raw(NodeId id) { return static_cast<std::uint64_t>(id); }

inline constexpr NodeId root_id{0};
inline constexpr NodeId trash_id{1};
inline constexpr NodeId conflict_id{2};
inline constexpr std::uint64_t first_user_id = 3;

constexpr bool is_sentinel(NodeId id) { return raw(id) < first_user_id; }

struct TreeNode {
  NodeId id{};
  Timestamp ts{};  // last op applied to this node
  NodeId parent{};

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Unordered replicated tree as a parent map. ROOT, TRASH and CONFLICT are
/// always present; TRASH and CONFLICT hang off ROOT and never move.
///
/// Every ancestor walk is bounded by size()+1 steps. Exceeding the bound
/// (a corrupt, cyclic state) throws std::logic_error instead of spinning.
class TreeState {
 public:
  TreeState();

  std::optional<TreeNode> get_node(NodeId id) const;
  const TreeNode* find(NodeId id) const;
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }

  /// Inserts or overwrites a record. No structural checks; callers own safety.
  void put(NodeId id, NodeId parent, Timestamp ts);
  void erase(NodeId id);

  /// True iff `n` lies on the walk from `p` up to (excluding) ROOT, i.e. iff
  /// moving `n` under `p` would close a cycle. True for n == p.
  bool check_cycle(NodeId n, NodeId p) const;

  bool is_reachable_from_root(NodeId id) const;

  /// [id, parent(id), ..., ROOT]
  std::vector<NodeId> path_to_root(NodeId id) const;

  /// Records ordered by id.
  std::vector<TreeNode> sorted_nodes() const;

  /// One line per node, ordered by id: "<id> <parent> <counter> <replica>".
  /// ROOT's parent is written as "-". Two replicas are converged iff their
  /// serializations are byte-identical.
  std::string serialize() const;
  std::string digest() const;

  static std::optional<TreeState> parse(std::string_view text);

  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

 private:
  const TreeNode& at(NodeId id) const;

  std::unordered_map<NodeId, TreeNode> nodes_;
};

/// Single parent, acyclic, every node reachable from ROOT, sentinels in
/// place. Returns a description of the first violation found.
std::optional<std::string> find_invariant_violation(const TreeState& state);

/// 64-bit FNV-1a over the bytes, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string to_string(NodeId id);

}  // namespace treemove
