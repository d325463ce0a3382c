#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>

namespace treemove {

/// Dense replica identifier, 0..R-1 within one deployment.
enum class ReplicaId : std::uint32_t {};

constexpr std::uint32_t raw(ReplicaId id) { return static_cast<std::uint32_t>(id); }

/// Globally unique operation timestamp: Lamport counter with the issuing
/// replica as tiebreak. Ordered lexicographically on (counter, replica).
struct Timestamp {
  std::uint64_t counter = 0;
  ReplicaId replica{};

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

std::ostream& operator<<(std::ostream& os, const Timestamp& ts);

/// Per-replica Lamport clock. Not synchronized; the owning replica serializes
/// access.
class LamportClock {
 public:
  explicit LamportClock(ReplicaId replica, std::uint64_t time = 0) : time_(time), replica_(replica) {}

  /// Pre-increments the counter and stamps a fresh timestamp.
  /// Throws std::overflow_error instead of wrapping.
  Timestamp tick();

  /// Receive rule: plain max with the incoming counter, no increment.
  void witness(const Timestamp& ts) {
    if (ts.counter > time_) time_ = ts.counter;
  }

  std::uint64_t time() const { return time_; }
  ReplicaId replica() const { return replica_; }

 private:
  std::uint64_t time_;
  ReplicaId replica_;
};

}  // namespace treemove

template <>
struct std::hash<treemove::Timestamp> {
  std::size_t operator()(const treemove::Timestamp& ts) const noexcept {
    return std::hash<std::uint64_t>{}(ts.counter * 0x9e3779b97f4a7c15ULL ^ treemove::raw(ts.replica));
  }
};
