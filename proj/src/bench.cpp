#include "rdfleet/bench.hpp"

#include <json.hpp>

#include <chrono>
#include <ostream>
#include <thread>

#include "rdfleet/model_io.hpp"
#include "rdfleet/yeast.hpp"

namespace rdfleet {
namespace {

const char* mode_name(BenchMode m) { return m == BenchMode::Strong ? "strong" : "weak"; }

double run_workflow(const std::shared_ptr<const CompiledModel>& model, const BenchWorkload& w, std::uint64_t jobs,
                    std::size_t workers, StorageMode mode, const std::shared_ptr<StorageBackend>& storage,
                    const std::string& id) {
  EnsembleOptions options;
  options.workers = workers;
  const auto start = std::chrono::steady_clock::now();
  if (mode == StorageMode::None) {
    run_ensemble_nostorage(model, jobs, w.base_seed, w.postprocessor, options);
  } else {
    auto handle = create_ensemble(id, model, w.base_seed, mode, storage);
    add_realizations(handle, jobs, options);
    map_aggregate(handle, w.postprocessor, options);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (mode != StorageMode::None) {
    for (const auto& key : storage->list(id)) storage->remove(key);
  }
  return seconds;
}

BenchReport run_bench(const BenchWorkload& w, BenchMode bench_mode, std::uint64_t jobs_param,
                      const std::vector<std::size_t>& worker_counts, StorageMode mode,
                      const std::shared_ptr<StorageBackend>& storage) {
  if (worker_counts.empty()) throw Error("bench needs at least one worker count");
  for (std::size_t i = 0; i < worker_counts.size(); ++i) {
    if (worker_counts[i] == 0 || (i > 0 && worker_counts[i] <= worker_counts[i - 1])) {
      throw Error("bench worker counts must be positive and strictly increasing");
    }
  }
  if (mode != StorageMode::None && !storage) throw Error("bench storage mode needs a backend");
  const auto model = compile_validated(w.model);

  BenchReport report;
  report.mode = bench_mode;
  report.storage = mode;
  report.workload = w.name;
  report.hardware_threads = std::thread::hardware_concurrency();
  if (worker_counts.back() > report.hardware_threads) {
    report.warnings.push_back("largest worker count " + std::to_string(worker_counts.back()) + " exceeds the " +
                              std::to_string(report.hardware_threads) + " logical CPUs of this machine");
  }

  double t1 = 0.0;
  double base_workers = static_cast<double>(worker_counts.front());
  for (auto p : worker_counts) {
    BenchRow row;
    row.workers = p;
    row.jobs = bench_mode == BenchMode::Strong ? jobs_param : jobs_param * p;
    row.wall_seconds = run_workflow(model, w, row.jobs, p, mode, storage,
                                    "bench-" + std::string(mode_name(bench_mode)) + "-" + to_string(mode) + "-w" +
                                        std::to_string(p));
    if (report.rows.empty()) t1 = row.wall_seconds;
    const double rel = static_cast<double>(p) / base_workers;
    if (bench_mode == BenchMode::Strong) {
      row.speedup = t1 / row.wall_seconds;
      row.efficiency = row.speedup / rel;
    } else {
      row.efficiency = t1 / row.wall_seconds;
      row.speedup = rel * row.efficiency;
    }
    if (rel > 1.0) row.serial_fraction = (1.0 / row.speedup - 1.0 / rel) / (1.0 - 1.0 / rel);
    report.rows.push_back(row);
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : report.rows) {
    if (row.workers == worker_counts.front()) continue;
    sum += row.serial_fraction;
    ++n;
  }
  report.serial_fraction = n > 0 ? sum / static_cast<double>(n) : 0.0;
  report.speedup_limit = report.serial_fraction > 0.0 ? 1.0 / report.serial_fraction : 0.0;
  if (bench_mode == BenchMode::Weak) {
    for (const auto& row : report.rows) {
      if (row.efficiency < 0.9) {
        report.warnings.push_back("weak scaling at " + std::to_string(row.workers) + " workers deviates from constant time (efficiency " +
                                  format_double(row.efficiency) + ")");
      }
    }
  }
  return report;
}

}  // namespace

BenchWorkload yeast_bench_workload(std::uint64_t n_total, double t_end, int mesh_subdiv) {
  YeastGeometry g;
  g.mesh_subdiv = mesh_subdiv;
  g.t_end = t_end;
  g.n_out = 11;
  BenchWorkload w;
  w.name = "yeast-polarization N=" + std::to_string(n_total) + " t_end=" + format_double(t_end) +
           " subdiv=" + std::to_string(mesh_subdiv);
  w.model = build_yeast_model(n_total, YeastParams::calibrated(), g);
  w.postprocessor = "polarization_stats:Cdc42_m";
  return w;
}

BenchReport bench_strong(const BenchWorkload& workload, std::uint64_t n_jobs, const std::vector<std::size_t>& worker_counts,
                         StorageMode mode, std::shared_ptr<StorageBackend> storage) {
  return run_bench(workload, BenchMode::Strong, n_jobs, worker_counts, mode, storage);
}

BenchReport bench_weak(const BenchWorkload& workload, std::uint64_t jobs_per_worker,
                       const std::vector<std::size_t>& worker_counts, StorageMode mode,
                       std::shared_ptr<StorageBackend> storage) {
  return run_bench(workload, BenchMode::Weak, jobs_per_worker, worker_counts, mode, storage);
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "mode,storage,workers,jobs,wall_seconds,speedup,efficiency,serial_fraction\n";
  for (const auto& r : report.rows) {
    out << mode_name(report.mode) << ',' << to_string(report.storage) << ',' << r.workers << ',' << r.jobs << ','
        << format_double(r.wall_seconds) << ',' << format_double(r.speedup) << ',' << format_double(r.efficiency)
        << ',' << format_double(r.serial_fraction) << '\n';
  }
}

std::string bench_to_json(const BenchReport& report, int indent) {
  nlohmann::json j;
  j["schema_version"] = kBenchSchemaVersion;
  j["mode"] = mode_name(report.mode);
  j["storage"] = to_string(report.storage);
  j["workload"] = report.workload;
  j["hardware_threads"] = report.hardware_threads;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"workers", r.workers},
                         {"jobs", r.jobs},
                         {"wall_seconds", r.wall_seconds},
                         {"speedup", r.speedup},
                         {"efficiency", r.efficiency},
                         {"serial_fraction", r.serial_fraction}});
  }
  j["saturation"] = {{"serial_fraction", report.serial_fraction}, {"speedup_limit", report.speedup_limit}};
  j["warnings"] = report.warnings;
  return j.dump(indent);
}

}  // namespace rdfleet
