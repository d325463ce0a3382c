#pragma once

#include <iosfwd>

#include "treemove/clock.hpp"
#include "treemove/tree.hpp"

namespace treemove {

/// move<ts, n, p>: make `n` a child of `p`. Insert is a move of a node that
/// does not exist yet; delete is a move under TRASH.
struct MoveOp {
  Timestamp ts;
  NodeId n{};
  NodeId p{};

  friend bool operator==(const MoveOp&, const MoveOp&) = default;
};

std::ostream& operator<<(std::ostream& os, const MoveOp& op);

}  // namespace treemove
