#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <unordered_map>

#include "treemove/tree.hpp"

namespace treemove {

/// Per-node history of up to `capacity` distinct previous parents, most
/// recent first. Re-adding a parent already in the list moves it to the
/// front; the oldest entry is evicted past capacity.
class PresentLog {
 public:
  explicit PresentLog(std::size_t capacity = 5) : capacity_(capacity) {}

  void add(NodeId node, NodeId previous_parent);

  /// Removes and returns the most recent previous parent of `node`.
  std::optional<NodeId> pop(NodeId node);

  const std::deque<NodeId>& entries(NodeId node) const;
  std::size_t capacity() const { return capacity_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::unordered_map<NodeId, std::deque<NodeId>> entries_;
};

}  // namespace treemove
