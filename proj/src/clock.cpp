#include "treemove/clock.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>

namespace treemove {

std::ostream& operator<<(std::ostream& os, const Timestamp& ts) {
  return os << '(' << ts.counter << ", r" << raw(ts.replica) << ')';
}

Timestamp LamportClock::tick() {
  if (time_ == std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("lamport clock overflow on replica " + std::to_string(raw(replica_)));
  }
  return Timestamp{++time_, replica_};
}

}  // namespace treemove
