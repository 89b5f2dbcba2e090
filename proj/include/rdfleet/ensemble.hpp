#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdfleet/model.hpp"
#include "rdfleet/solver.hpp"
#include "rdfleet/statistics.hpp"
#include "rdfleet/storage.hpp"

namespace rdfleet {

enum class StorageMode { None, Shared, Persistent };

const char* to_string(StorageMode mode);
/// Accepts "none", "shared", "persistent"; throws Error otherwise.
StorageMode parse_storage_mode(std::string_view text);

struct EnsembleOptions {
  std::size_t workers = 1;
  SolverOptions solver;
  /// Fault injection forwarded to the process pool.
  std::optional<std::uint64_t> crash_on_first_attempt;
};

/// A named collection of realizations. Realization i uses seed
/// derive_seed(base_seed, i) and, when stored, lives under key `<id>/r<i>`.
struct EnsembleHandle {
  std::string id;
  std::shared_ptr<const CompiledModel> model;
  std::uint64_t base_seed = 0;
  StorageMode mode = StorageMode::None;
  std::shared_ptr<StorageBackend> storage;
  std::vector<std::string> keys;
  /// Realizations to generate on the fly when `mode` is None.
  std::uint64_t planned = 0;

  std::uint64_t seed(std::uint64_t index) const noexcept { return derive_seed(base_seed, index); }
  std::string key(std::uint64_t index) const { return id + "/r" + std::to_string(index); }
};

/// Validates and compiles the model; throws ModelError listing diagnostics.
std::shared_ptr<const CompiledModel> compile_validated(const ModelSpec& model);

EnsembleHandle create_ensemble(std::string id, const ModelSpec& model, std::uint64_t base_seed, StorageMode mode,
                               std::shared_ptr<StorageBackend> storage = nullptr);

EnsembleHandle create_ensemble(std::string id, std::shared_ptr<const CompiledModel> model, std::uint64_t base_seed,
                               StorageMode mode, std::shared_ptr<StorageBackend> storage = nullptr);

/// Reopen a stored ensemble from its manifest (`<id>/manifest.json`).
EnsembleHandle open_ensemble(const std::string& id, StorageMode mode, std::shared_ptr<StorageBackend> storage);

/// Generate `n` more realizations in parallel and store them (workflow C). A task is
/// retried once; if any task still fails the handle is left unchanged and TaskError
/// carries the index and seed.
void add_realizations(EnsembleHandle& handle, std::uint64_t n, const EnsembleOptions& options);

/// Apply post-processor `g` to every realization and aggregate in index order.
/// Stored ensembles are read back (workflow D); a None-mode handle generates its
/// `planned` realizations on the fly (workflow B).
StatSummary map_aggregate(const EnsembleHandle& handle, const std::string& g, const EnsembleOptions& options);

/// Fused generate-and-reduce with no persistence (workflow B).
StatSummary run_ensemble_nostorage(const ModelSpec& model, std::uint64_t n, std::uint64_t base_seed,
                                   const std::string& g, const EnsembleOptions& options);
StatSummary run_ensemble_nostorage(std::shared_ptr<const CompiledModel> model, std::uint64_t n,
                                   std::uint64_t base_seed, const std::string& g, const EnsembleOptions& options);

/// Per-realization g outputs in index order, without summarizing (used by sweeps).
std::vector<std::vector<double>> generate_outputs(std::shared_ptr<const CompiledModel> model, std::uint64_t n,
                                                  std::uint64_t base_seed, const std::string& g,
                                                  const EnsembleOptions& options);

/// JSON document mirroring StatSummary.
std::string summary_to_json(const StatSummary& summary, int indent = 2);

}  // namespace rdfleet
