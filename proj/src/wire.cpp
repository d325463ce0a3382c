#include "treemove/wire.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <limits>

#include <nlohmann/json.hpp>

namespace treemove {

std::string encode_op(const MoveOp& op) {
  nlohmann::ordered_json j;
  j["ts"]["c"] = op.ts.counter;
  j["ts"]["r"] = raw(op.ts.replica);
  j["n"] = raw(op.n);
  j["p"] = raw(op.p);
  return j.dump();
}

namespace {

template <typename T>
T unsigned_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_unsigned()) {
    throw WireError(std::string("op field '") + key + "' missing or not an unsigned integer");
  }
  const auto v = it->get<std::uint64_t>();
  if (v > std::numeric_limits<T>::max()) throw WireError(std::string("op field '") + key + "' out of range");
  return static_cast<T>(v);
}

bool write_all(int fd, const char* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

// Bytes read before EOF or error.
std::size_t read_all(int fd, char* data, std::size_t size) {
  std::size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd, data + got, size - got, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    got += static_cast<std::size_t>(n);
  }
  return got;
}

}  // namespace

MoveOp decode_op(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw WireError(std::string("malformed op: ") + e.what());
  }
  if (!j.is_object() || j.size() != 3) throw WireError("op must be an object with ts, n and p");
  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_object() || ts->size() != 2) throw WireError("op field 'ts' must be {c, r}");
  MoveOp op;
  op.ts.counter = unsigned_field<std::uint64_t>(*ts, "c");
  op.ts.replica = ReplicaId{unsigned_field<std::uint32_t>(*ts, "r")};
  op.n = NodeId{unsigned_field<std::uint64_t>(j, "n")};
  op.p = NodeId{unsigned_field<std::uint64_t>(j, "p")};
  return op;
}

std::string encode_frame(std::string_view payload) {
  if (payload.size() > max_frame_bytes) throw WireError("frame too large");
  const auto size = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((size >> 24) & 0xff));
  out.push_back(static_cast<char>((size >> 16) & 0xff));
  out.push_back(static_cast<char>((size >> 8) & 0xff));
  out.push_back(static_cast<char>(size & 0xff));
  out.append(payload);
  return out;
}

void write_frame(int fd, std::string_view payload) {
  const std::string frame = encode_frame(payload);
  if (!write_all(fd, frame.data(), frame.size())) throw WireError(std::string("send failed: ") + std::strerror(errno));
}

std::optional<std::string> read_frame(int fd) {
  unsigned char header[4];
  const std::size_t got = read_all(fd, reinterpret_cast<char*>(header), 4);
  if (got == 0) return std::nullopt;
  if (got < 4) throw WireError("truncated frame header");
  const std::uint32_t size = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                             (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (size > max_frame_bytes) throw WireError("frame of " + std::to_string(size) + " bytes exceeds limit");
  std::string payload(size, '\0');
  if (read_all(fd, payload.data(), size) < size) throw WireError("truncated frame body");
  return payload;
}

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw std::invalid_argument("expected host:port, got '" + std::string(text) + "'");
  unsigned port = 0;
  const auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port > 65535) {
    throw std::invalid_argument("bad port in '" + std::string(text) + "'");
  }
  return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

int connect_to(const Endpoint& endpoint, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(endpoint.host.c_str(), std::to_string(endpoint.port).c_str(), &hints, &found) != 0) return -1;
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr && fd < 0; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) != 0) {
      ::close(fd);
      fd = -1;
    }
  }
  ::freeaddrinfo(found);
  return fd;
}

PeerClient::~PeerClient() { close(); }

bool PeerClient::connect(const Endpoint& endpoint, int timeout_ms) {
  close();
  fd_ = connect_to(endpoint, timeout_ms);
  return fd_ >= 0;
}

void PeerClient::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::string PeerClient::request(std::string_view command) {
  if (fd_ < 0) throw WireError("client is not connected");
  write_frame(fd_, command);
  auto reply = read_frame(fd_);
  if (!reply) throw WireError("daemon closed the connection");
  return *reply;
}

}  // namespace treemove
