#include "treemove/exhaustive.hpp"

#include <algorithm>
#include <memory>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace treemove {

namespace {

std::string shape_digest(const TreeState& state) {
  std::string out;
  for (const auto& node : state.sorted_nodes()) {
    out += std::to_string(raw(node.id)) + ' ' + std::to_string(raw(node.parent)) + '\n';
  }
  return fnv1a_hex(out);
}

struct Message {
  std::uint32_t to;
  MoveOp op;
};

struct World {
  std::vector<std::unique_ptr<SimNode>> nodes;
  std::vector<Message> pending;

  World clone() const {
    World w;
    for (const auto& n : nodes) w.nodes.push_back(n->clone());
    w.pending = pending;
    return w;
  }

  void flush(std::uint32_t from) {
    for (const auto& op : nodes[from]->drain()) {
      for (std::uint32_t to = 0; to < nodes.size(); ++to) {
        if (to != from) pending.push_back(Message{to, op});
      }
    }
  }

  std::string key() const {
    std::string out;
    for (const auto& n : nodes) {
      out += n->fingerprint();
      out += '|';
    }
    std::vector<std::string> msgs;
    for (const auto& m : pending) {
      msgs.push_back(std::to_string(m.to) + '@' + std::to_string(m.op.ts.counter) + '.' +
                     std::to_string(raw(m.op.ts.replica)) + ':' + std::to_string(raw(m.op.n)) + '>' +
                     std::to_string(raw(m.op.p)));
    }
    std::sort(msgs.begin(), msgs.end());
    for (const auto& m : msgs) out += m + ';';
    return out;
  }
};

class Explorer {
 public:
  Explorer(std::size_t max_states, bool fifo) : max_states_(max_states), fifo_(fifo) {}

  // pending is appended in send order, so the first entry for a
  // (from, to) pair is that channel's head.
  static bool head_of_channel(const World& world, std::size_t i) {
    const auto& m = world.pending[i];
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = world.pending[j];
      if (o.to == m.to && o.op.ts.replica == m.op.ts.replica) return false;
    }
    return true;
  }

  // Depth-first over an explicit stack: unfair schedules can make paths
  // long enough to overflow the call stack.
  void explore(World initial) {
    std::vector<World> stack;
    visit(initial);
    stack.push_back(std::move(initial));
    while (!stack.empty()) {
      World world = std::move(stack.back());
      stack.pop_back();
      if (world.pending.empty()) {
        record_terminal(world);
        continue;
      }
      for (std::size_t i = 0; i < world.pending.size(); ++i) {
        if (fifo_ && !head_of_channel(world, i)) continue;
        World next = world.clone();
        const Message msg = next.pending[i];
        next.pending.erase(next.pending.begin() + static_cast<std::ptrdiff_t>(i));
        next.nodes[msg.to]->receive(msg.op);
        if (auto v = find_invariant_violation(next.nodes[msg.to]->tree())) result_.violations.push_back(*v);
        next.flush(msg.to);
        if (visit(next)) stack.push_back(std::move(next));
      }
    }
  }

  // False if already seen.
  bool visit(const World& world) {
    if (!visited_.insert(world.key()).second) return false;
    if (visited_.size() > max_states_) {
      throw std::runtime_error("interleaving enumeration exceeded " + std::to_string(max_states_) + " states");
    }
    return true;
  }

  void record_terminal(const World& world) {
    ++result_.terminals;
    std::set<std::string> here;
    for (const auto& n : world.nodes) {
      here.insert(n->tree().digest());
      result_.digests.insert(n->tree().digest());
      result_.shapes.insert(shape_digest(n->tree()));
    }
    if (here.size() > 1) ++result_.divergent_terminals;
  }

  ExhaustiveResult finish() {
    result_.states = visited_.size();
    return std::move(result_);
  }

 private:
  std::size_t max_states_;
  bool fifo_;
  std::unordered_set<std::string> visited_;
  ExhaustiveResult result_;
};

}  // namespace

ExhaustiveResult exhaustive_interleavings(const InterleavingInstance& instance, Algorithm algorithm,
                                          std::size_t max_previous_parents, std::size_t max_states, bool fifo) {
  const std::size_t replicas = instance.moves.size();
  if (replicas < 1 || replicas > 3) throw std::invalid_argument("exhaustive enumeration supports 1 to 3 replicas");
  for (const auto& list : instance.moves) {
    if (list.size() > 4) throw std::invalid_argument("exhaustive enumeration supports at most 4 moves per replica");
  }

  World world;
  for (std::uint32_t r = 0; r < replicas; ++r) {
    world.nodes.push_back(make_sim_node(algorithm, ReplicaId{r}, max_previous_parents));
  }
  for (const auto& [n, p] : instance.initial) world.nodes[0]->generate(n, p);
  for (const auto& op : world.nodes[0]->drain()) {
    for (std::uint32_t r = 1; r < replicas; ++r) world.nodes[r]->receive(op);
  }
  for (std::uint32_t r = 1; r < replicas; ++r) world.nodes[r]->drain();

  for (std::uint32_t r = 0; r < replicas; ++r) {
    for (const auto& [n, p] : instance.moves[r]) {
      if (!world.nodes[r]->tree().contains(p)) throw std::invalid_argument("instance move names an unknown parent");
      world.nodes[r]->generate(n, p);
    }
    world.flush(r);
  }

  Explorer explorer(max_states, fifo);
  explorer.explore(std::move(world));
  return explorer.finish();
}

InterleavingInstance crossing_moves_instance() {
  const NodeId a{3}, b{4};
  return InterleavingInstance{{{a, root_id}, {b, root_id}}, {{{a, b}}, {{b, a}}}};
}

InterleavingInstance random_instance(std::uint64_t seed, std::size_t replicas, std::size_t moves_per_replica,
                                     std::size_t tree_size) {
  if (tree_size == 0) throw std::invalid_argument("tree_size must be at least 1");
  std::mt19937_64 rng(seed);
  InterleavingInstance inst;
  // Random recursive tree: node i hangs under ROOT or an earlier node.
  for (std::size_t i = 0; i < tree_size; ++i) {
    const std::uint64_t slot = rng() % (i + 1);
    inst.initial.emplace_back(NodeId{first_user_id + i}, slot == i ? root_id : NodeId{first_user_id + slot});
  }
  inst.moves.resize(replicas);
  for (auto& list : inst.moves) {
    for (std::size_t k = 0; k < moves_per_replica; ++k) {
      const NodeId n{first_user_id + rng() % tree_size};
      const std::uint64_t slot = rng() % (tree_size + 2);
      const NodeId p = slot == tree_size ? root_id : slot == tree_size + 1 ? trash_id : NodeId{first_user_id + slot};
      list.emplace_back(n, p);
    }
  }
  return inst;
}

}  // namespace treemove
