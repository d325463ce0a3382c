#include "treemove/scenario.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace treemove {

NodeId Scenario::node(const std::string& alias) const {
  auto it = aliases.find(alias);
  if (it == aliases.end()) throw std::out_of_range("unknown node alias " + alias);
  return it->second;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) {
    if (tok.front() == '#') break;
    out.push_back(tok);
  }
  return out;
}

template <typename T>
T parse_number(std::size_t line, const std::string& tok) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ScenarioError(line, "bad number '" + tok + "'");
  return value;
}

double parse_ms(std::size_t line, const std::string& tok) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v) || v < 0.0) throw ScenarioError(line, "bad time '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ScenarioError(line, "bad time '" + tok + "'");
  }
}

class Parser {
 public:
  Scenario run(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw_line;
    std::vector<std::pair<std::size_t, std::vector<double>>> rows;
    std::optional<double> uniform;
    while (std::getline(in, raw_line)) {
      ++line_;
      auto tok = split(raw_line);
      if (tok.empty()) continue;
      const std::string& head = tok[0];
      if (head == "name") {
        want(tok, 2);
        s_.name = tok[1];
      } else if (head == "replicas") {
        want(tok, 2);
        s_.config.replicas = parse_number<std::size_t>(line_, tok[1]);
      } else if (head == "latency") {
        want(tok, 2);
        uniform = parse_ms(line_, tok[1]);
      } else if (head == "latency-row") {
        if (tok.size() < 3) throw ScenarioError(line_, "latency-row needs an index and values");
        std::vector<double> row;
        for (std::size_t i = 2; i < tok.size(); ++i) row.push_back(parse_ms(line_, tok[i]));
        rows.emplace_back(parse_number<std::size_t>(line_, tok[1]), std::move(row));
      } else if (head == "jitter") {
        want(tok, 2);
        s_.config.jitter_ms = parse_ms(line_, tok[1]);
      } else if (head == "reorder") {
        want(tok, 2);
        if (tok[1] != "on" && tok[1] != "off") throw ScenarioError(line_, "reorder expects on|off");
        s_.config.reorder = tok[1] == "on";
      } else if (head == "seed") {
        want(tok, 2);
        s_.config.seed = parse_number<std::uint64_t>(line_, tok[1]);
      } else if (head == "m") {
        want(tok, 2);
        s_.config.max_previous_parents = parse_number<std::size_t>(line_, tok[1]);
      } else if (head == "node") {
        want(tok, 3);
        const NodeId id{parse_number<std::uint64_t>(line_, tok[2])};
        if (is_sentinel(id)) throw ScenarioError(line_, "alias may not name a sentinel id");
        s_.aliases[tok[1]] = id;
      } else {
        event(tok);
      }
    }
    if (uniform) s_.config.latency_ms = uniform_latency(s_.config.replicas, *uniform);
    if (!rows.empty()) {
      s_.config.latency_ms.assign(s_.config.replicas, std::vector<double>(s_.config.replicas, 0.0));
      for (auto& [i, row] : rows) {
        if (i >= s_.config.replicas || row.size() != s_.config.replicas) {
          throw ScenarioError(line_, "latency-row " + std::to_string(i) + " does not match replica count");
        }
        s_.config.latency_ms[i] = row;
      }
    }
    try {
      validate(s_.config);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(line_, e.what());
    }
    for (const auto& ev : s_.events) {
      if (raw(ev.replica) >= s_.config.replicas) throw ScenarioError(line_, "event names unknown replica");
    }
    return std::move(s_);
  }

 private:
  void want(const std::vector<std::string>& tok, std::size_t n) const {
    if (tok.size() != n) throw ScenarioError(line_, "'" + tok[0] + "' expects " + std::to_string(n - 1) + " operand(s)");
  }

  NodeId node(const std::string& tok) const {
    if (tok == "root") return root_id;
    if (tok == "trash") return trash_id;
    if (tok == "conflict") return conflict_id;
    if (auto it = s_.aliases.find(tok); it != s_.aliases.end()) return it->second;
    return NodeId{parse_number<std::uint64_t>(line_, tok)};
  }

  void event(const std::vector<std::string>& tok) {
    if (tok.size() < 2) throw ScenarioError(line_, "unknown directive '" + tok[0] + "'");
    SimEvent ev;
    ev.at = static_cast<SimTime>(std::llround(parse_ms(line_, tok[0]) * 1000.0));
    if (tok[1] == "generate") {
      if (tok.size() != 5) throw ScenarioError(line_, "generate expects <replica> <n> <p>");
      ev.replica = ReplicaId{parse_number<std::uint32_t>(line_, tok[2])};
      ev.action = GenerateEvent{node(tok[3]), node(tok[4])};
    } else if (tok[1] == "deliver") {
      if (tok.size() != 7) throw ScenarioError(line_, "deliver expects <replica> <counter> <origin> <n> <p>");
      ev.replica = ReplicaId{parse_number<std::uint32_t>(line_, tok[2])};
      MoveOp op{Timestamp{parse_number<std::uint64_t>(line_, tok[3]), ReplicaId{parse_number<std::uint32_t>(line_, tok[4])}},
                node(tok[5]), node(tok[6])};
      if (op.ts.counter == 0) throw ScenarioError(line_, "deliver needs a non-zero counter");
      ev.action = DeliverEvent{op};
    } else {
      throw ScenarioError(line_, "unknown directive '" + tok[0] + "'");
    }
    s_.events.push_back(ev);
  }

  Scenario s_;
  std::size_t line_ = 0;
};

std::string format_ms(SimTime at) {
  std::ostringstream out;
  out << at / 1000;
  if (const auto frac = at % 1000; frac != 0) out << '.' << std::setw(3) << std::setfill('0') << frac;
  return out.str();
}

std::string format_latency(double ms) {
  std::ostringstream out;
  out << std::setprecision(17) << ms;
  return out.str();
}

constexpr std::string_view fig1_text = R"(# Crossing moves on two replicas: a under b at r0, b under a at r1.
name fig1
replicas 2
latency 10
jitter 0
reorder off
seed 1
node a 3
node b 4
node f1 5
node f2 6
node f3 7
node w 8
# r0 builds the shared tree; its clock reaches 5.
0 generate 0 a root
1 generate 0 b root
2 generate 0 f1 root
3 generate 0 f2 root
4 generate 0 f3 root
# r1 has seen all of it (clock 5) and issues one more insert (ts 6).
20 generate 1 w root
# Concurrent crossing moves: r1 -> <7,b,a>, r0 -> <6,a,b>.
21 generate 1 b a
22 generate 0 a b
)";

constexpr std::string_view exp2_text = R"(# Remote move of a under its descendant x. On the cycle x-z-y-n-a the newest
# node is y, whose previous parents are n, z (both under a) and c (safe).
name exp2
replicas 2
latency 10
jitter 0
reorder off
seed 1
node a 3
node n 4
node c 5
node z 6
node x 7
node y 8
0 generate 0 a root
0.1 generate 0 n a
0.2 generate 0 c root
0.3 generate 0 z root
0.4 generate 0 x root
0.5 generate 0 y c
# r1 knows the initial tree and concurrently moves a under x.
20 generate 1 a x
# r0 reshapes the tree so that x ends up below a.
21 generate 0 y z
21.1 generate 0 y n
21.2 generate 0 z y
21.3 generate 0 x z
21.4 generate 0 y n
)";

}  // namespace

Scenario parse_scenario(std::string_view text) { return Parser{}.run(text); }

std::string format_scenario(const Scenario& s) {
  std::ostringstream out;
  if (!s.name.empty()) out << "name " << s.name << '\n';
  const auto& cfg = s.config;
  out << "replicas " << cfg.replicas << '\n';
  for (std::size_t i = 0; i < cfg.latency_ms.size(); ++i) {
    out << "latency-row " << i;
    for (double v : cfg.latency_ms[i]) out << ' ' << format_latency(v);
    out << '\n';
  }
  out << "jitter " << format_latency(cfg.jitter_ms) << '\n';
  out << "reorder " << (cfg.reorder ? "on" : "off") << '\n';
  out << "seed " << cfg.seed << '\n';
  out << "m " << cfg.max_previous_parents << '\n';
  for (const auto& ev : s.events) {
    out << format_ms(ev.at) << ' ';
    if (auto* gen = std::get_if<GenerateEvent>(&ev.action)) {
      out << "generate " << raw(ev.replica) << ' ' << raw(gen->n) << ' ' << raw(gen->p) << '\n';
    } else {
      const auto& op = std::get<DeliverEvent>(ev.action).op;
      out << "deliver " << raw(ev.replica) << ' ' << op.ts.counter << ' ' << raw(op.ts.replica) << ' ' << raw(op.n)
          << ' ' << raw(op.p) << '\n';
    }
  }
  return out.str();
}

std::optional<Scenario> bundled_scenario(std::string_view name) {
  if (name == "fig1") return parse_scenario(fig1_text);
  if (name == "exp2") return parse_scenario(exp2_text);
  return std::nullopt;
}

std::vector<std::string> bundled_scenario_names() { return {"fig1", "exp2"}; }

}  // namespace treemove
