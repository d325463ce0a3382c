#include "treemove/peer.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace treemove {

namespace {

constexpr std::string_view hello_prefix = "HELLO ";

NodeId parse_node(const std::string& token) {
  if (token == "root") return root_id;
  if (token == "trash") return trash_id;
  if (token == "conflict") return conflict_id;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size() || token[0] == '-') throw std::invalid_argument("bad node id '" + token + "'");
  return NodeId{v};
}

std::string op_reply(const LocalApply& result) {
  return std::string(result.applied ? "OK " : "SKIPPED ") + encode_op(result.op);
}

}  // namespace

PeerNode::PeerNode(PeerConfig config)
    : config_(std::move(config)),
      log_(std::make_shared<spdlog::logger>("replica-" + std::to_string(raw(config_.id)),
                                            std::make_shared<spdlog::sinks::stderr_sink_mt>())),
      replica_(config_.id, ReplicaOptions{config_.max_previous_parents}) {
  for (const auto& ep : config_.peers) {
    auto link = std::make_unique<Link>();
    link->endpoint = ep;
    links_.push_back(std::move(link));
  }
}

PeerNode::~PeerNode() { stop(); }

void PeerNode::start() {
  if (running_) return;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(config_.listen.port);
  if (::getaddrinfo(config_.listen.host.c_str(), port.c_str(), &hints, &found) != 0 || found == nullptr) {
    throw std::runtime_error("cannot resolve listen address " + config_.listen.to_string());
  }
  listen_fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const bool bound = listen_fd_ >= 0 && ::bind(listen_fd_, found->ai_addr, found->ai_addrlen) == 0 &&
                     ::listen(listen_fd_, 64) == 0;
  ::freeaddrinfo(found);
  if (!bound) {
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("cannot listen on " + config_.listen.to_string());
  }
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  config_.listen.port = ntohs(addr.sin_port);

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  for (auto& link : links_) {
    Link* l = link.get();
    l->thread = std::thread([this, l] { sender_loop(*l); });
  }
  if (config_.state_digest_interval_s > 0) digest_thread_ = std::thread([this] { digest_loop(); });
  log_->info("listening on {} with {} peer(s)", config_.listen.to_string(), links_.size());
}

void PeerNode::stop() {
  if (!running_.exchange(false)) return;
  {
    std::lock_guard lk(state_mutex_);
  }
  links_cv_.notify_all();
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard lk(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : conn_threads_) {
    if (t.joinable()) t.join();
  }
  conn_threads_.clear();
  for (auto& link : links_) {
    if (link->thread.joinable()) link->thread.join();
  }
  if (digest_thread_.joinable()) digest_thread_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  log_->info("stopped");
}

Endpoint PeerNode::endpoint() const { return config_.listen; }

std::string PeerNode::snapshot() const {
  std::lock_guard lk(state_mutex_);
  return replica_.state().serialize();
}

std::string PeerNode::digest() const {
  std::lock_guard lk(state_mutex_);
  return replica_.state().digest();
}

std::size_t PeerNode::pending() const {
  std::lock_guard lk(state_mutex_);
  std::size_t total = 0;
  for (const auto& link : links_) total += link->queue.size();
  return total;
}

void PeerNode::set_partitioned(bool partitioned) {
  {
    std::lock_guard lk(state_mutex_);
    partitioned_ = partitioned;
  }
  links_cv_.notify_all();
  if (partitioned) {
    // Drop live peer links so neither side can slip an op through.
    std::lock_guard lk(conn_mutex_);
    for (int fd : peer_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  log_->info(partitioned ? "partitioned" : "healed");
}

void PeerNode::fan_out() {
  const auto ops = replica_.drain_outbox();
  if (ops.empty()) return;
  for (auto& link : links_) link->queue.insert(link->queue.end(), ops.begin(), ops.end());
  links_cv_.notify_all();
}

void PeerNode::track(int fd, bool peer_link) {
  std::lock_guard lk(conn_mutex_);
  conn_fds_.insert(fd);
  if (peer_link) peer_fds_.insert(fd);
}

void PeerNode::untrack(int fd) {
  std::lock_guard lk(conn_mutex_);
  conn_fds_.erase(fd);
  peer_fds_.erase(fd);
}

void PeerNode::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lk(conn_mutex_);
    if (!running_) {
      ::close(fd);
      break;
    }
    conn_fds_.insert(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void PeerNode::serve_connection(int fd) {
  try {
    if (auto first = read_frame(fd)) {
      if (first->rfind(hello_prefix, 0) == 0) {
        serve_peer(fd, *first);
      } else {
        serve_client(fd, std::move(*first));
      }
    }
  } catch (const WireError& e) {
    log_->debug("connection closed: {}", e.what());
  }
  untrack(fd);
  ::close(fd);
}

void PeerNode::serve_peer(int fd, const std::string& hello) {
  const std::string from = hello.substr(hello_prefix.size());
  track(fd, true);
  if (partitioned_) return;
  log_->info("peer {} connected", from);
  while (running_) {
    auto frame = read_frame(fd);
    if (!frame || partitioned_) break;
    std::string reply = "ACK";
    try {
      const MoveOp op = decode_op(*frame);
      std::lock_guard lk(state_mutex_);
      const auto outcome = replica_.apply_remote(op);
      if (outcome.compensation) {
        log_->info("cycle on {}: moved {} under {} with {}", to_string(op.n), to_string(outcome.undo_node),
                   to_string(outcome.undo_parent), encode_op(*outcome.compensation));
      }
      fan_out();
    } catch (const std::exception& e) {
      log_->warn("rejected op from peer {}: {}", from, e.what());
      reply = std::string("ERR ") + e.what();
    }
    write_frame(fd, reply);
  }
  log_->info("peer {} disconnected", from);
}

void PeerNode::serve_client(int fd, std::string first) {
  std::optional<std::string> frame = std::move(first);
  while (frame && running_) {
    write_frame(fd, handle_command(*frame));
    frame = read_frame(fd);
  }
}

std::string PeerNode::handle_command(std::string_view command) {
  std::istringstream in{std::string(command)};
  std::string verb;
  in >> verb;
  std::vector<std::string> args;
  for (std::string tok; in >> tok;) args.push_back(tok);
  auto arity = [&](std::size_t n) {
    if (args.size() != n) throw std::invalid_argument(verb + " takes " + std::to_string(n) + " argument(s)");
  };

  try {
    if (verb == "MOVE" || verb == "INSERT") {
      arity(2);
      const NodeId n = parse_node(args[0]);
      const NodeId p = parse_node(args[1]);
      std::lock_guard lk(state_mutex_);
      const bool exists = replica_.state().contains(n);
      if (verb == "MOVE" && !exists) return "ERR unknown node " + to_string(n);
      if (verb == "INSERT" && exists) return "ERR node " + to_string(n) + " already exists";
      const auto result = replica_.apply_local(n, p);
      fan_out();
      return op_reply(result);
    }
    if (verb == "DELETE") {
      arity(1);
      const NodeId n = parse_node(args[0]);
      std::lock_guard lk(state_mutex_);
      if (!replica_.state().contains(n)) return "ERR unknown node " + to_string(n);
      const auto result = replica_.remove(n);
      fan_out();
      return op_reply(result);
    }
    if (verb == "SNAPSHOT") {
      arity(0);
      return snapshot();
    }
    if (verb == "DIGEST") {
      arity(0);
      return digest();
    }
    if (verb == "STATUS") {
      arity(0);
      std::lock_guard lk(state_mutex_);
      std::size_t queued = 0;
      for (const auto& link : links_) queued += link->queue.size();
      nlohmann::ordered_json j{{"replica", raw(config_.id)},
                               {"clock", replica_.clock().time()},
                               {"nodes", replica_.state().size()},
                               {"pending", queued},
                               {"partitioned", partitioned_.load()},
                               {"compensations", replica_.compensations()},
                               {"suppressed", replica_.suppressed_local()},
                               {"digest", replica_.state().digest()}};
      return j.dump();
    }
    if (verb == "PARTITION" || verb == "HEAL") {
      arity(0);
      set_partitioned(verb == "PARTITION");
      return "OK";
    }
  } catch (const std::invalid_argument& e) {
    return std::string("ERR ") + e.what();
  }
  return "ERR unknown command '" + verb + "'";
}

void PeerNode::sender_loop(Link& link) {
  int fd = -1;
  auto drop = [&] {
    if (fd < 0) return;
    untrack(fd);
    ::close(fd);
    fd = -1;
  };
  auto backoff = [&] {
    std::unique_lock lk(state_mutex_);
    links_cv_.wait_for(lk, std::chrono::milliseconds(config_.retry_ms), [&] { return !running_; });
  };

  while (running_) {
    MoveOp op;
    {
      std::unique_lock lk(state_mutex_);
      links_cv_.wait(lk, [&] { return !running_ || (!partitioned_ && !link.queue.empty()); });
      if (!running_) break;
      op = link.queue.front();
    }
    bool fresh = false;
    if (fd < 0) {
      fresh = true;
      fd = connect_to(link.endpoint, config_.io_timeout_ms);
      if (fd < 0) {
        backoff();
        continue;
      }
      track(fd, true);
      log_->info("connected to {}", link.endpoint.to_string());
    }
    std::optional<std::string> reply;
    try {
      if (fresh) write_frame(fd, std::string(hello_prefix) + std::to_string(raw(config_.id)));
      fresh = false;
      write_frame(fd, encode_op(op));
      reply = read_frame(fd);
    } catch (const WireError& e) {
      log_->debug("send to {} failed: {}", link.endpoint.to_string(), e.what());
    }
    if (!reply || partitioned_) {
      drop();
      backoff();
      continue;
    }
    if (reply->rfind("ERR", 0) == 0) log_->error("{} refused {}: {}", link.endpoint.to_string(), encode_op(op), *reply);
    std::lock_guard lk(state_mutex_);
    if (!link.queue.empty() && link.queue.front() == op) link.queue.pop_front();
  }
  drop();
}

void PeerNode::digest_loop() {
  const auto interval = std::chrono::duration<double>(config_.state_digest_interval_s);
  while (running_) {
    std::unique_lock lk(state_mutex_);
    if (links_cv_.wait_for(lk, interval, [&] { return !running_; })) break;
    std::size_t queued = 0;
    for (const auto& link : links_) queued += link->queue.size();
    log_->info("state digest {} nodes {} pending {}", replica_.state().digest(), replica_.state().size(), queued);
  }
}

}  // namespace treemove
