#include "treemove/netsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

namespace treemove {

LatencyMatrix uniform_latency(std::size_t replicas, double ms) {
  LatencyMatrix m(replicas, std::vector<double>(replicas, ms));
  for (std::size_t i = 0; i < replicas; ++i) m[i][i] = 0.0;
  return m;
}

LatencyMatrix geo_latency() {
  return {{0.0, 41.0, 111.0}, {41.0, 0.0, 79.0}, {111.0, 79.0, 0.0}};
}

void validate(const SimConfig& cfg) {
  if (cfg.replicas == 0) throw std::invalid_argument("simulation needs at least one replica");
  if (cfg.latency_ms.empty()) return;
  if (cfg.latency_ms.size() != cfg.replicas) throw std::invalid_argument("latency matrix size != replica count");
  for (std::size_t i = 0; i < cfg.replicas; ++i) {
    if (cfg.latency_ms[i].size() != cfg.replicas) throw std::invalid_argument("latency matrix is not square");
    if (cfg.latency_ms[i][i] != 0.0) throw std::invalid_argument("latency matrix diagonal must be zero");
    for (std::size_t j = 0; j < cfg.replicas; ++j) {
      if (cfg.latency_ms[i][j] < 0.0) throw std::invalid_argument("negative latency");
      if (cfg.latency_ms[i][j] != cfg.latency_ms[j][i]) throw std::invalid_argument("latency matrix is not symmetric");
    }
  }
  if (cfg.jitter_ms < 0.0) throw std::invalid_argument("negative jitter");
}

TimingStats TimingStats::from_samples(std::vector<double> samples) {
  TimingStats stats;
  stats.count = samples.size();
  if (samples.empty()) return stats;
  double sum = 0.0;
  for (double s : samples) sum += s;
  stats.mean_us = sum / static_cast<double>(samples.size());
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size())));
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1), samples.end());
  stats.p99_us = samples[rank - 1];
  return stats;
}

namespace {

SimTime to_sim_time(double ms) { return static_cast<SimTime>(std::llround(ms * 1000.0)); }

struct Queued {
  SimTime at;
  int kind;  // 0 generate, 1 deliver
  std::uint32_t replica;
  Timestamp ts;
  std::uint64_t seq;
  std::variant<GenerateEvent, DeliverEvent> action;
};

struct Later {
  bool operator()(const Queued& a, const Queued& b) const {
    return std::tie(a.at, a.kind, a.replica, a.ts, a.seq) > std::tie(b.at, b.kind, b.replica, b.ts, b.seq);
  }
};

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const ApplyObserver& observer)
      : cfg_(cfg), observer_(observer), rng_(cfg.seed), last_delivery_(cfg.replicas, std::vector<SimTime>(cfg.replicas, 0)) {
    validate(cfg_);
    if (cfg_.latency_ms.empty()) cfg_.latency_ms = uniform_latency(cfg_.replicas, 10.0);
    for (std::size_t i = 0; i < cfg_.replicas; ++i) {
      nodes_.push_back(make_sim_node(cfg_.algorithm, ReplicaId{static_cast<std::uint32_t>(i)}, cfg_.max_previous_parents));
    }
    reports_.resize(cfg_.replicas);
    local_samples_.resize(cfg_.replicas);
    remote_samples_.resize(cfg_.replicas);
    for (std::size_t i = 0; i < cfg_.replicas; ++i) reports_[i].id = ReplicaId{static_cast<std::uint32_t>(i)};
  }

  SimReport run(const std::vector<SimEvent>& script) {
    for (const auto& ev : script) {
      if (raw(ev.replica) >= cfg_.replicas) throw std::invalid_argument("script event names unknown replica");
      const bool deliver = std::holds_alternative<DeliverEvent>(ev.action);
      const Timestamp ts = deliver ? std::get<DeliverEvent>(ev.action).op.ts : Timestamp{};
      queue_.push(Queued{ev.at, deliver ? 1 : 0, raw(ev.replica), ts, seq_++, ev.action});
    }

    SimReport report;
    report.algorithm = cfg_.algorithm;
    while (!queue_.empty()) {
      if (++report.events > cfg_.max_events) {
        std::ostringstream msg;
        msg << "simulation did not quiesce within " << cfg_.max_events << " events (t=" << now_
            << "us, pending=" << queue_.size() << ", broadcast=" << broadcast_.size() << ")";
        throw std::runtime_error(msg.str());
      }
      Queued ev = queue_.top();
      queue_.pop();
      now_ = ev.at;
      if (auto* gen = std::get_if<GenerateEvent>(&ev.action)) {
        generate(ev.replica, *gen);
      } else {
        deliver(ev.replica, std::get<DeliverEvent>(ev.action).op);
      }
    }

    report.finished_at = now_;
    report.broadcast_ops = std::move(broadcast_);
    report.converged = true;
    for (std::size_t i = 0; i < cfg_.replicas; ++i) {
      reports_[i].local = TimingStats::from_samples(std::move(local_samples_[i]));
      reports_[i].remote = TimingStats::from_samples(std::move(remote_samples_[i]));
      reports_[i].digest = nodes_[i]->tree().digest();
      if (reports_[i].digest != reports_[0].digest) report.converged = false;
      report.final_states.push_back(nodes_[i]->tree());
    }
    report.replicas = std::move(reports_);
    return report;
  }

 private:
  using Clock = std::chrono::steady_clock;

  double elapsed_us(Clock::time_point start) const {
    return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
  }

  void generate(std::uint32_t r, const GenerateEvent& gen) {
    auto& node = *nodes_[r];
    auto& rep = reports_[r];
    if (is_sentinel(gen.n) || !node.tree().contains(gen.p)) {
      ++rep.rejected;
      return;
    }
    LocalApply result;
    if (cfg_.measure_time) {
      const auto start = Clock::now();
      result = node.generate(gen.n, gen.p);
      local_samples_[r].push_back(elapsed_us(start));
    } else {
      result = node.generate(gen.n, gen.p);
    }
    if (result.applied) {
      ++rep.generated;
    } else {
      ++rep.suppressed;
    }
    const std::size_t emitted = flush(r);
    if (observer_) observer_(ApplyTrace{ReplicaId{r}, false, result.op, result.applied, nullptr, emitted, node.tree()});
  }

  void deliver(std::uint32_t r, const MoveOp& op) {
    auto& node = *nodes_[r];
    auto& rep = reports_[r];
    ++rep.received;
    RemoteStep step;
    if (cfg_.measure_time) {
      const auto start = Clock::now();
      step = node.receive(op);
      remote_samples_[r].push_back(elapsed_us(start));
    } else {
      step = node.receive(op);
    }
    if (step.outcome.stale_ignored) ++rep.stale;
    if (step.outcome.cycle_detected) ++rep.cycles;
    if (step.outcome.compensation) ++rep.compensations;
    rep.undo_redo_steps += step.undo_redo_steps;
    const std::size_t emitted = flush(r);
    if (observer_) observer_(ApplyTrace{ReplicaId{r}, true, op, false, &step, emitted, node.tree()});
  }

  // Schedules everything the replica queued for broadcast.
  std::size_t flush(std::uint32_t from) {
    auto ops = nodes_[from]->drain();
    for (const auto& op : ops) {
      broadcast_.push_back(op);
      for (std::uint32_t to = 0; to < cfg_.replicas; ++to) {
        if (to == from) continue;
        SimTime at = now_ + to_sim_time(cfg_.latency_ms[from][to]);
        const SimTime jitter = to_sim_time(cfg_.jitter_ms);
        if (jitter > 0) at += static_cast<SimTime>(rng_() % static_cast<std::uint64_t>(jitter + 1));
        if (!cfg_.reorder) {
          at = std::max(at, last_delivery_[from][to]);
          last_delivery_[from][to] = at;
        }
        queue_.push(Queued{at, 1, to, op.ts, seq_++, DeliverEvent{op}});
      }
    }
    return ops.size();
  }

  SimConfig cfg_;
  const ApplyObserver& observer_;
  std::mt19937_64 rng_;
  std::vector<std::vector<SimTime>> last_delivery_;
  std::vector<std::unique_ptr<SimNode>> nodes_;
  std::vector<ReplicaReport> reports_;
  std::vector<std::vector<double>> local_samples_;
  std::vector<std::vector<double>> remote_samples_;
  std::vector<MoveOp> broadcast_;
  std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_ = 0;
};

nlohmann::json timing_json(const TimingStats& t) {
  return {{"count", t.count}, {"mean_us", t.mean_us}, {"p99_us", t.p99_us}};
}

}  // namespace

SimReport run_scenario(const SimConfig& cfg, const std::vector<SimEvent>& script, const ApplyObserver& observer) {
  return Simulator(cfg, observer).run(script);
}

nlohmann::json to_json(const SimReport& report) {
  nlohmann::json replicas = nlohmann::json::array();
  for (const auto& r : report.replicas) {
    replicas.push_back({{"replica", raw(r.id)},
                        {"generated", r.generated},
                        {"suppressed", r.suppressed},
                        {"rejected", r.rejected},
                        {"received", r.received},
                        {"stale", r.stale},
                        {"cycles", r.cycles},
                        {"compensations", r.compensations},
                        {"undo_redo_steps", r.undo_redo_steps},
                        {"local", timing_json(r.local)},
                        {"remote", timing_json(r.remote)},
                        {"digest", r.digest}});
  }
  return {{"algorithm", std::string(to_string(report.algorithm))},
          {"converged", report.converged},
          {"events", report.events},
          {"finished_at_us", report.finished_at},
          {"broadcast_ops", report.broadcast_ops.size()},
          {"replicas", std::move(replicas)}};
}

std::string metrics_csv(const SimReport& report) {
  std::ostringstream out;
  out << "replica,op_kind,count,mean_us,p99_us,compensations\n";
  for (const auto& r : report.replicas) {
    const std::size_t conflicts = report.algorithm == Algorithm::proposed ? r.compensations : r.undo_redo_steps;
    out << raw(r.id) << ",local," << r.local.count << ',' << r.local.mean_us << ',' << r.local.p99_us << ",0\n";
    out << raw(r.id) << ",remote," << r.remote.count << ',' << r.remote.mean_us << ',' << r.remote.p99_us << ','
        << conflicts << '\n';
  }
  return out.str();
}

}  // namespace treemove
