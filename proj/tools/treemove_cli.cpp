// treemove: simulator, exhaustive checker, benchmarks and replica daemon.
//
// Exit codes: 0 success, 1 invariant or convergence failure, 2 usage error.

#include <signal.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treemove/bench.hpp"
#include "treemove/exhaustive.hpp"
#include "treemove/netsim.hpp"
#include "treemove/peer.hpp"
#include "treemove/scenario.hpp"
#include "treemove/workload.hpp"

using namespace treemove;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

Algorithm algorithm_from(const std::string& name) {
  auto algo = parse_algorithm(name);
  if (!algo) throw UsageError("unknown algorithm '" + name + "' (proposed|baseline)");
  return *algo;
}

std::vector<Algorithm> algorithms_from(const std::string& name) {
  if (name == "both") return {Algorithm::proposed, Algorithm::baseline};
  return {algorithm_from(name)};
}

// ---- sim run ----

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string algo;
  std::string report = "-";
  std::string csv;
  std::string state_out;
};

int sim_run(const RunArgs& args) {
  Scenario scenario;
  if (auto bundled = bundled_scenario(args.scenario)) {
    scenario = *bundled;
  } else {
    try {
      scenario = parse_scenario(read_file(args.scenario));
    } catch (const ScenarioError& e) {
      throw UsageError(e.what());
    }
  }
  if (args.seed) scenario.config.seed = *args.seed;
  if (!args.algo.empty()) scenario.config.algorithm = algorithm_from(args.algo);

  std::size_t violations = 0;
  const SimReport report = run_scenario(scenario.config, scenario.events, [&](const ApplyTrace& t) {
    if (auto v = find_invariant_violation(t.state)) {
      if (violations++ == 0) std::cerr << "replica " << raw(t.replica) << " after " << t.op << ": " << *v << '\n';
    }
  });

  auto doc = to_json(report);
  doc["scenario"] = scenario.name;
  doc["invariant_violations"] = violations;
  write_output(args.report, doc.dump(2) + "\n");
  if (!args.csv.empty()) write_output(args.csv, metrics_csv(report));
  if (!args.state_out.empty()) {
    for (std::size_t i = 0; i < report.final_states.size(); ++i) {
      write_output(args.state_out + "." + std::to_string(i) + ".tree", report.final_states[i].serialize());
    }
  }
  return report.converged && violations == 0 ? exit_ok : exit_failed;
}

// ---- sim fuzz ----

struct FuzzArgs {
  std::size_t trials = 100;
  std::size_t replicas = 3;
  std::size_t ops = 200;
  std::size_t tree = 20;
  double rate = 1000.0;
  double jitter = 20.0;
  std::uint64_t seed = 1;
  std::string algo = "proposed";
};

int sim_fuzz(const FuzzArgs& args) {
  std::size_t diverged = 0, violations = 0, compensations = 0;
  for (std::size_t trial = 0; trial < args.trials; ++trial) {
    SimConfig cfg;
    cfg.replicas = args.replicas;
    cfg.algorithm = algorithm_from(args.algo);
    cfg.seed = args.seed + trial;
    cfg.jitter_ms = args.jitter;
    cfg.measure_time = false;
    const auto report = run_scenario(cfg, random_workload(cfg, args.tree, args.ops, args.rate), [&](const ApplyTrace& t) {
      if (find_invariant_violation(t.state)) ++violations;
    });
    if (!report.converged) {
      ++diverged;
      std::cerr << "seed " << cfg.seed << " diverged\n";
    }
    for (const auto& r : report.replicas) compensations += r.compensations;
  }
  std::cout << "trials " << args.trials << " diverged " << diverged << " invariant_violations " << violations
            << " compensations " << compensations << '\n';
  return diverged == 0 && violations == 0 ? exit_ok : exit_failed;
}

// ---- sim exhaustive ----

struct ExhaustiveArgs {
  std::size_t instances = 500;
  std::size_t replicas = 2;
  std::size_t ops = 3;
  std::size_t tree = 4;
  std::uint64_t seed = 0;
  std::string algo = "proposed";
  bool reorder = false;
};

int sim_exhaustive(const ExhaustiveArgs& args) {
  const Algorithm algo = algorithm_from(args.algo);
  std::size_t failed = 0, states = 0, terminals = 0;
  auto check = [&](const std::string& label, const InterleavingInstance& inst) {
    ExhaustiveResult res;
    try {
      res = exhaustive_interleavings(inst, algo, 5, 200'000, !args.reorder);
    } catch (const std::runtime_error& e) {
      std::cerr << label << ": " << e.what() << '\n';
      ++failed;
      return;
    }
    states += res.states;
    terminals += res.terminals;
    if (res.digests.size() != 1 || !res.violations.empty()) {
      ++failed;
      std::cerr << label << ": " << res.digests.size() << " final digests, " << res.divergent_terminals
                << " terminal(s) with disagreeing replicas, " << res.violations.size() << " invariant violation(s)\n";
    }
  };
  try {
    check("crossing moves", crossing_moves_instance());
    for (std::size_t i = 0; i < args.instances; ++i) {
      check("instance " + std::to_string(args.seed + i),
            random_instance(args.seed + i, args.replicas, args.ops, args.tree));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::cout << "instances " << args.instances + 1 << " failed " << failed << " states " << states << " terminals "
            << terminals << '\n';
  return failed == 0 ? exit_ok : exit_failed;
}

// ---- peer ----

struct ServeArgs {
  std::uint32_t id = 0;
  std::string listen = "127.0.0.1:7000";
  std::vector<std::string> peers;
  std::size_t m = 5;
  double digest_interval = 0.0;
};

int peer_serve(const ServeArgs& args) {
  PeerConfig cfg;
  cfg.id = ReplicaId{args.id};
  try {
    cfg.listen = parse_endpoint(args.listen);
    for (const auto& p : args.peers) cfg.peers.push_back(parse_endpoint(p));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.max_previous_parents = args.m;
  cfg.state_digest_interval_s = args.digest_interval;

  // Threads inherit the mask, so only sigwait below sees these.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  PeerNode node(cfg);
  node.start();
  std::cout << "listening " << node.endpoint().to_string() << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  node.stop();
  return exit_ok;
}

int peer_send(const std::string& to, const std::vector<std::string>& words) {
  Endpoint ep;
  try {
    ep = parse_endpoint(to);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::string command;
  for (const auto& w : words) command += (command.empty() ? "" : " ") + w;
  PeerClient client;
  if (!client.connect(ep)) {
    std::cerr << "cannot reach " << to << '\n';
    return exit_failed;
  }
  const std::string reply = client.request(command);
  std::cout << reply << (reply.empty() || reply.back() != '\n' ? "\n" : "");
  return reply.rfind("ERR", 0) == 0 ? exit_failed : exit_ok;
}

// ---- verify ----

int verify(const std::vector<std::string>& files) {
  std::optional<std::string> first;
  bool ok = true;
  for (const auto& path : files) {
    const auto state = TreeState::parse(read_file(path));
    if (!state) {
      std::cout << path << ": unparsable\n";
      ok = false;
      continue;
    }
    if (auto v = find_invariant_violation(*state)) {
      std::cout << path << ": " << *v << '\n';
      ok = false;
      continue;
    }
    const std::string digest = state->digest();
    std::cout << path << ": " << digest << '\n';
    if (!first) first = digest;
    if (digest != *first) ok = false;
  }
  std::cout << (ok ? "identical\n" : "MISMATCH\n");
  return ok ? exit_ok : exit_failed;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(std::stod(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replicated tree with conflict-free move operations"};
  app.require_subcommand(1);
  int rc = exit_ok;

  auto* sim = app.add_subcommand("sim", "Deterministic network simulation")->require_subcommand(1);

  RunArgs run;
  auto* run_cmd = sim->add_subcommand("run", "Replay a scenario file or a bundled scenario (fig1, exp2)");
  run_cmd->add_option("scenario", run.scenario, "Scenario file or bundled name")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--algo", run.algo, "proposed|baseline (default: scenario setting)");
  run_cmd->add_option("--report", run.report, "JSON report path, - for stdout");
  run_cmd->add_option("--csv", run.csv, "Per-replica timing CSV path");
  run_cmd->add_option("--state-out", run.state_out, "Write final trees to <prefix>.<replica>.tree");
  run_cmd->callback([&] { rc = sim_run(run); });

  FuzzArgs fuzz;
  auto* fuzz_cmd = sim->add_subcommand("fuzz", "Random schedules checked for invariants and convergence");
  fuzz_cmd->add_option("--trials", fuzz.trials)->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--replicas", fuzz.replicas)->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--ops", fuzz.ops, "Moves per replica");
  fuzz_cmd->add_option("--tree", fuzz.tree, "Initial tree size")->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--rate", fuzz.rate, "Ops/s per replica")->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--jitter", fuzz.jitter, "Delivery jitter (ms)")->check(CLI::NonNegativeNumber);
  fuzz_cmd->add_option("--seed", fuzz.seed);
  fuzz_cmd->add_option("--algo", fuzz.algo);
  fuzz_cmd->callback([&] { rc = sim_fuzz(fuzz); });

  ExhaustiveArgs ex;
  auto* ex_cmd = sim->add_subcommand("exhaustive", "Enumerate every delivery order of small instances");
  ex_cmd->add_option("--instances", ex.instances, "Random instances after the crossing-moves example");
  ex_cmd->add_option("--replicas", ex.replicas)->check(CLI::Range(1, 3));
  ex_cmd->add_option("--ops", ex.ops, "Moves per replica")->check(CLI::Range(0, 4));
  ex_cmd->add_option("--tree", ex.tree)->check(CLI::PositiveNumber);
  ex_cmd->add_option("--seed", ex.seed);
  ex_cmd->add_option("--algo", ex.algo);
  ex_cmd->add_flag("--reorder", ex.reorder, "Drop per-channel FIFO (may not terminate)");
  ex_cmd->callback([&] { rc = sim_exhaustive(ex); });

  auto* bench = app.add_subcommand("bench", "Desk-scale experiments, CSV output")->require_subcommand(1);

  ApplyTimeOptions at;
  std::vector<std::string> rates{"250", "1000", "2000"};
  std::string at_out, at_algo = "both";
  auto* at_cmd = bench->add_subcommand("apply-time", "Mean apply time against op rate");
  at_cmd->add_option("--rates", rates, "Ops/s per replica")->delimiter(',');
  at_cmd->add_option("--tree", at.tree_size)->check(CLI::PositiveNumber);
  at_cmd->add_option("--ops", at.ops_per_replica);
  at_cmd->add_option("--trials", at.trials)->check(CLI::PositiveNumber);
  at_cmd->add_option("--warmup", at.warmup);
  at_cmd->add_option("--jitter", at.jitter_ms)->check(CLI::NonNegativeNumber);
  at_cmd->add_option("--seed", at.seed);
  at_cmd->add_option("--algo", at_algo, "proposed|baseline|both");
  at_cmd->add_option("--out", at_out, "CSV path (default stdout)");
  at_cmd->callback([&] {
    at.rates = parse_doubles(rates);
    at.algorithms = algorithms_from(at_algo);
    if (at.trials <= at.warmup) throw UsageError("--trials must exceed --warmup");
    write_output(at_out, to_csv(bench_apply_time(at)));
  });

  ConflictOptions co;
  std::string co_out, co_algo = "proposed";
  auto* co_cmd = bench->add_subcommand("conflicts", "Conflicts per replica against tree size");
  co_cmd->add_option("--sizes", co.tree_sizes)->delimiter(',');
  co_cmd->add_option("--ops", co.ops_per_replica);
  co_cmd->add_option("--rate", co.rate)->check(CLI::PositiveNumber);
  co_cmd->add_option("--seeds", co.seeds)->check(CLI::PositiveNumber);
  co_cmd->add_option("--seed", co.seed);
  co_cmd->add_option("--jitter", co.jitter_ms)->check(CLI::NonNegativeNumber);
  co_cmd->add_option("--algo", co_algo, "proposed|baseline|both");
  co_cmd->add_option("--out", co_out, "CSV path (default stdout)");
  co_cmd->callback([&] {
    co.algorithms = algorithms_from(co_algo);
    write_output(co_out, to_csv(bench_conflicts(co)));
  });

  auto* peer = app.add_subcommand("peer", "Replica daemon")->require_subcommand(1);
  ServeArgs serve;
  auto* serve_cmd = peer->add_subcommand("serve", "Run a replica until SIGINT/SIGTERM");
  serve_cmd->add_option("--id", serve.id, "Replica id")->required();
  serve_cmd->add_option("--listen", serve.listen, "host:port (port 0 picks one)");
  serve_cmd->add_option("--peer", serve.peers, "Peer host:port, repeatable");
  serve_cmd->add_option("--m", serve.m, "Previous parents remembered per node");
  serve_cmd->add_option("--state-digest-interval", serve.digest_interval, "Seconds between digest log lines, 0 off")
      ->check(CLI::NonNegativeNumber);
  serve_cmd->callback([&] { rc = peer_serve(serve); });

  std::string send_to;
  std::vector<std::string> send_words;
  auto* send_cmd = peer->add_subcommand("send", "Send one command (MOVE, INSERT, DELETE, SNAPSHOT, ...) to a daemon");
  send_cmd->add_option("--to", send_to, "Daemon host:port")->required();
  send_cmd->add_option("command", send_words)->required();
  send_cmd->callback([&] { rc = peer_send(send_to, send_words); });

  std::vector<std::string> files;
  auto* verify_cmd = app.add_subcommand("verify", "Check final-state files are valid and identical");
  verify_cmd->add_option("files", files)->required()->check(CLI::ExistingFile);
  verify_cmd->callback([&] { rc = verify(files); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_usage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return exit_failed;
  }
  return rc;
}
