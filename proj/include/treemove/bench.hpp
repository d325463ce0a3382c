#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "treemove/netsim.hpp"

namespace treemove {

struct ApplyTimeOptions {
  std::vector<double> rates{250.0, 1000.0, 2000.0};  // ops/s per replica
  std::size_t tree_size = 500;
  std::size_t ops_per_replica = 500;
  std::size_t trials = 7;
  std::size_t warmup = 2;  // leading trials dropped from the average
  double jitter_ms = 20.0;
  std::uint64_t seed = 1;
  std::vector<Algorithm> algorithms{Algorithm::proposed, Algorithm::baseline};
};

struct ApplyTimeRow {
  Algorithm algorithm = Algorithm::proposed;
  double rate = 0.0;
  double local_us = 0.0;
  double remote_us = 0.0;
  /// Compensations (proposed) or undo+redo steps (baseline) per replica.
  double conflicts = 0.0;
};

/// Three replicas on the geo latency matrix with out-of-order delivery.
/// Each point is the mean over the kept trials of the unweighted mean over
/// replicas. Throws std::runtime_error if any trial ends diverged or with a
/// corrupt tree.
std::vector<ApplyTimeRow> bench_apply_time(const ApplyTimeOptions& options);

struct ConflictOptions {
  std::vector<std::size_t> tree_sizes{100, 250, 500};
  std::size_t ops_per_replica = 500;
  double rate = 500.0;
  std::size_t seeds = 5;
  std::uint64_t seed = 1;  // first seed; seeds run seed, seed+1, ...
  double jitter_ms = 20.0;
  std::vector<Algorithm> algorithms{Algorithm::proposed};
};

struct ConflictRow {
  Algorithm algorithm = Algorithm::proposed;
  std::size_t tree_size = 0;
  std::uint32_t replica = 0;
  double conflicts = 0.0;  // averaged over seeds
};

/// Same network as bench_apply_time. Conflicts are compensations for the
/// proposed algorithm and undo+redo steps for the baseline.
std::vector<ConflictRow> bench_conflicts(const ConflictOptions& options);

/// Unweighted mean of the per-replica rows for one (algorithm, size).
double mean_conflicts(const std::vector<ConflictRow>& rows, Algorithm algorithm, std::size_t tree_size);

std::string to_csv(const std::vector<ApplyTimeRow>& rows);
std::string to_csv(const std::vector<ConflictRow>& rows);

/// Throws std::runtime_error unless every replica holds the same valid tree.
void check_final_states(const SimReport& report);

}  // namespace treemove
