#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "treemove/netsim.hpp"

namespace treemove {

/// Line-oriented scenario file. Blank lines and '#' comments are ignored.
///
///   name <text>
///   replicas <count>
///   latency <ms>                      uniform between every pair
///   latency-row <i> <ms> <ms> ...     explicit matrix row
///   jitter <ms>
///   reorder on|off
///   seed <u64>
///   m <previous parents per node>
///   node <alias> <id>                 name a node id for later lines
///   <time_ms> generate <replica> <n> <p>
///   <time_ms> deliver <replica> <counter> <origin> <n> <p>
///
/// Node operands accept root, trash, conflict, an alias, or an integer id.
struct Scenario {
  std::string name;
  SimConfig config;
  std::vector<SimEvent> events;
  std::map<std::string, NodeId> aliases;

  NodeId node(const std::string& alias) const;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& what)
      : std::runtime_error("scenario line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Scenario parse_scenario(std::string_view text);

/// Canonical text form: numeric ids only, events in script order.
std::string format_scenario(const Scenario& scenario);

/// "fig1": two replicas issue crossing moves a->b and b->a.
/// "exp2": a remote move of a under its descendant x, where the newest node
/// on the cycle (y) has two unsafe previous parents before a safe one.
std::optional<Scenario> bundled_scenario(std::string_view name);
std::vector<std::string> bundled_scenario_names();

}  // namespace treemove
