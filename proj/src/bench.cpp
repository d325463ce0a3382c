#include "treemove/bench.hpp"

#include <sstream>
#include <stdexcept>

#include "treemove/workload.hpp"

namespace treemove {

void check_final_states(const SimReport& report) {
  for (std::size_t i = 0; i < report.final_states.size(); ++i) {
    if (auto v = find_invariant_violation(report.final_states[i])) {
      throw std::runtime_error("replica " + std::to_string(i) + " ended with a corrupt tree: " + *v);
    }
  }
  if (!report.converged) throw std::runtime_error("replicas diverged");
}

namespace {

SimConfig geo_config(Algorithm algorithm, std::uint64_t seed, double jitter_ms) {
  SimConfig cfg;
  cfg.replicas = 3;
  cfg.algorithm = algorithm;
  cfg.seed = seed;
  cfg.latency_ms = geo_latency();
  cfg.reorder = true;
  cfg.jitter_ms = jitter_ms;
  return cfg;
}

double conflicts_of(const SimReport& report, const ReplicaReport& r) {
  return static_cast<double>(report.algorithm == Algorithm::proposed ? r.compensations : r.undo_redo_steps);
}

}  // namespace

std::vector<ApplyTimeRow> bench_apply_time(const ApplyTimeOptions& options) {
  if (options.trials <= options.warmup) throw std::invalid_argument("need more trials than warm-up runs");
  std::vector<ApplyTimeRow> rows;
  for (Algorithm algorithm : options.algorithms) {
    for (double rate : options.rates) {
      ApplyTimeRow row{algorithm, rate};
      const double kept = static_cast<double>(options.trials - options.warmup);
      for (std::size_t trial = 0; trial < options.trials; ++trial) {
        const SimConfig cfg = geo_config(algorithm, options.seed + trial, options.jitter_ms);
        const SimReport report =
            run_scenario(cfg, random_workload(cfg, options.tree_size, options.ops_per_replica, rate));
        check_final_states(report);
        if (trial < options.warmup) continue;
        double local = 0.0, remote = 0.0, conflicts = 0.0;
        for (const auto& r : report.replicas) {
          local += r.local.mean_us;
          remote += r.remote.mean_us;
          conflicts += conflicts_of(report, r);
        }
        const double n = static_cast<double>(report.replicas.size());
        row.local_us += local / n / kept;
        row.remote_us += remote / n / kept;
        row.conflicts += conflicts / n / kept;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ConflictRow> bench_conflicts(const ConflictOptions& options) {
  if (options.seeds == 0) throw std::invalid_argument("need at least one seed");
  std::vector<ConflictRow> rows;
  for (Algorithm algorithm : options.algorithms) {
    for (std::size_t size : options.tree_sizes) {
      std::vector<double> per_replica(3, 0.0);
      for (std::size_t s = 0; s < options.seeds; ++s) {
        SimConfig cfg = geo_config(algorithm, options.seed + s, options.jitter_ms);
        cfg.measure_time = false;
        const SimReport report = run_scenario(cfg, random_workload(cfg, size, options.ops_per_replica, options.rate));
        check_final_states(report);
        for (std::size_t i = 0; i < report.replicas.size(); ++i) {
          per_replica[i] += conflicts_of(report, report.replicas[i]) / static_cast<double>(options.seeds);
        }
      }
      for (std::uint32_t i = 0; i < per_replica.size(); ++i) rows.push_back(ConflictRow{algorithm, size, i, per_replica[i]});
    }
  }
  return rows;
}

double mean_conflicts(const std::vector<ConflictRow>& rows, Algorithm algorithm, std::size_t tree_size) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& row : rows) {
    if (row.algorithm != algorithm || row.tree_size != tree_size) continue;
    sum += row.conflicts;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no rows for that algorithm and size");
  return sum / static_cast<double>(count);
}

std::string to_csv(const std::vector<ApplyTimeRow>& rows) {
  std::ostringstream out;
  out << "algorithm,rate,local_us,remote_us,compensations_or_undoredo\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << r.rate << ',' << r.local_us << ',' << r.remote_us << ',' << r.conflicts
        << '\n';
  }
  return out.str();
}

std::string to_csv(const std::vector<ConflictRow>& rows) {
  std::ostringstream out;
  out << "algorithm,tree_size,replica,conflict_count\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << r.tree_size << ',' << r.replica << ',' << r.conflicts << '\n';
  }
  return out.str();
}

}  // namespace treemove
