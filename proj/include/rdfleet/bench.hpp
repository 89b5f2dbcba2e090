#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rdfleet/ensemble.hpp"

namespace rdfleet {

enum class BenchMode { Strong, Weak };

struct BenchRow {
  std::size_t workers = 0;
  std::uint64_t jobs = 0;
  double wall_seconds = 0.0;
  /// Strong: T1/Tp. Weak: scaled speedup p*T1/Tp.
  double speedup = 0.0;
  /// Strong: speedup/p. Weak: T1/Tp (1 means constant time).
  double efficiency = 0.0;
  /// Karp-Flatt experimentally determined serial fraction; 0 for the baseline row.
  double serial_fraction = 0.0;
};

inline constexpr int kBenchSchemaVersion = 1;

struct BenchReport {
  BenchMode mode = BenchMode::Strong;
  StorageMode storage = StorageMode::None;
  std::string workload;
  unsigned hardware_threads = 0;
  std::vector<BenchRow> rows;
  /// Mean Karp-Flatt fraction over rows with p > 1, and the speedup bound 1/e it implies.
  double serial_fraction = 0.0;
  double speedup_limit = 0.0;
  std::vector<std::string> warnings;
};

/// The timed workload. The model is validated and compiled before any timing.
struct BenchWorkload {
  std::string name;
  ModelSpec model;
  std::string postprocessor;
  std::uint64_t base_seed = 1;
};

/// Yeast preset at fixed N over a shortened horizon.
BenchWorkload yeast_bench_workload(std::uint64_t n_total = 600, double t_end = 10.0, int mesh_subdiv = 2);

/// Fixed total jobs for every worker count. Each row times the full workflow:
/// run_ensemble_nostorage for None; add_realizations + map_aggregate otherwise.
/// Stored realizations are deleted after each row, outside the timed region.
BenchReport bench_strong(const BenchWorkload& workload, std::uint64_t n_jobs, const std::vector<std::size_t>& worker_counts,
                         StorageMode mode, std::shared_ptr<StorageBackend> storage = nullptr);

/// Jobs grow with workers: jobs = jobs_per_worker * p.
BenchReport bench_weak(const BenchWorkload& workload, std::uint64_t jobs_per_worker,
                       const std::vector<std::size_t>& worker_counts, StorageMode mode,
                       std::shared_ptr<StorageBackend> storage = nullptr);

/// `mode,storage,workers,jobs,wall_seconds,speedup,efficiency,serial_fraction`
void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string bench_to_json(const BenchReport& report, int indent = 2);

}  // namespace rdfleet
