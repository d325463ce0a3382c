#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "treemove/move_op.hpp"

namespace treemove {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t max_frame_bytes = 1u << 24;

/// {"ts":{"c":<counter>,"r":<replica>},"n":<id>,"p":<id>}, no whitespace.
std::string encode_op(const MoveOp& op);
/// Throws WireError on anything that is not exactly that shape.
MoveOp decode_op(std::string_view text);

/// 4-byte big-endian length followed by the payload.
std::string encode_frame(std::string_view payload);

/// Blocking frame I/O on a stream socket. write_frame throws WireError when
/// the peer is gone; read_frame returns nullopt on a clean EOF before the
/// header and throws on a truncated or oversized frame.
void write_frame(int fd, std::string_view payload);
std::optional<std::string> read_frame(int fd);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ':' + std::to_string(port); }
};

/// "host:port". Throws std::invalid_argument.
Endpoint parse_endpoint(std::string_view text);

/// Connected TCP socket or -1. `timeout_ms` also becomes the socket's
/// send and receive timeout.
int connect_to(const Endpoint& endpoint, int timeout_ms);

/// Synchronous request/response client for the daemon's command protocol.
class PeerClient {
 public:
  PeerClient() = default;
  ~PeerClient();
  PeerClient(const PeerClient&) = delete;
  PeerClient& operator=(const PeerClient&) = delete;

  /// False if the daemon is not reachable.
  bool connect(const Endpoint& endpoint, int timeout_ms = 2000);
  bool connected() const { return fd_ >= 0; }
  void close();

  /// Sends one command frame and returns the reply. Throws WireError.
  std::string request(std::string_view command);

 private:
  int fd_ = -1;
};

}  // namespace treemove
