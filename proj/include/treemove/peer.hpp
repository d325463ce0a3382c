#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "treemove/replica.hpp"
#include "treemove/wire.hpp"

namespace spdlog {
class logger;
}

namespace treemove {

struct PeerConfig {
  ReplicaId id{};
  Endpoint listen{"127.0.0.1", 0};  // port 0 picks a free port
  std::vector<Endpoint> peers;
  std::size_t max_previous_parents = 5;
  double state_digest_interval_s = 0.0;  // 0 disables the periodic digest log line
  int retry_ms = 100;
  int io_timeout_ms = 2000;
};

/// One replica daemon.
///
/// Connection protocol: every connection carries length-prefixed frames. A
/// connection whose first frame is "HELLO <replica>" is a peer link: each
/// following frame is one encoded op, answered by "ACK" once applied. Any
/// other first frame starts a client session of request/response commands:
///
///   MOVE <n> <p>     INSERT <n> <p>     DELETE <n>
///   SNAPSHOT         DIGEST             STATUS
///   PARTITION        HEAL
///
/// Local commands reply "OK <op>" or "SKIPPED <op>" (cycle check failed, not
/// broadcast), or "ERR <reason>". PARTITION stops all peer traffic in both
/// directions; outgoing ops stay buffered until HEAL.
///
/// Each peer has a sender thread that pushes this replica's ops one at a time
/// and waits for the ACK, reconnecting after failures. Delivery is
/// at-least-once; redelivered ops are ignored as stale.
class PeerNode {
 public:
  explicit PeerNode(PeerConfig config);
  ~PeerNode();
  PeerNode(const PeerNode&) = delete;
  PeerNode& operator=(const PeerNode&) = delete;

  /// Binds the listener and starts all threads. Throws std::runtime_error if
  /// the address cannot be bound.
  void start();
  void stop();

  /// The bound address (resolves port 0 after start()).
  Endpoint endpoint() const;

  /// The command interpreter behind client sessions.
  std::string handle_command(std::string_view command);

  std::string snapshot() const;
  std::string digest() const;
  void set_partitioned(bool partitioned);
  bool partitioned() const { return partitioned_; }
  /// Ops not yet acknowledged, summed over peers.
  std::size_t pending() const;

 private:
  struct Link {
    Endpoint endpoint;
    std::deque<MoveOp> queue;
    std::thread thread;
  };

  void accept_loop();
  void serve_connection(int fd);
  void serve_peer(int fd, const std::string& hello);
  void serve_client(int fd, std::string first);
  void sender_loop(Link& link);
  void digest_loop();
  void fan_out();  // caller holds state_mutex_
  void track(int fd, bool peer_link);
  void untrack(int fd);

  PeerConfig config_;
  std::shared_ptr<spdlog::logger> log_;

  mutable std::mutex state_mutex_;
  Replica replica_;
  std::vector<std::unique_ptr<Link>> links_;
  std::condition_variable links_cv_;

  std::atomic<bool> running_{false};
  std::atomic<bool> partitioned_{false};
  int listen_fd_ = -1;
  std::thread accept_thread_;
  std::thread digest_thread_;

  std::mutex conn_mutex_;
  std::set<int> conn_fds_;
  std::set<int> peer_fds_;
  std::vector<std::thread> conn_threads_;
};

}  // namespace treemove
