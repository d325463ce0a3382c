#include "treemove/present_log.hpp"

#include <algorithm>

namespace treemove {

void PresentLog::add(NodeId node, NodeId previous_parent) {
  if (capacity_ == 0) return;
  auto& list = entries_[node];
  if (auto it = std::find(list.begin(), list.end(), previous_parent); it != list.end()) list.erase(it);
  list.push_front(previous_parent);
  while (list.size() > capacity_) list.pop_back();
}

std::optional<NodeId> PresentLog::pop(NodeId node) {
  auto it = entries_.find(node);
  if (it == entries_.end() || it->second.empty()) return std::nullopt;
  NodeId front = it->second.front();
  it->second.pop_front();
  if (it->second.empty()) entries_.erase(it);
  return front;
}

const std::deque<NodeId>& PresentLog::entries(NodeId node) const {
  static const std::deque<NodeId> none;
  auto it = entries_.find(node);
  return it == entries_.end() ? none : it->second;
}

}  // namespace treemove
