#include "rdfleet/ensemble.hpp"

#include <json.hpp>

#include <cstring>

#include "rdfleet/model_io.hpp"
#include "rdfleet/postprocess.hpp"
#include "rdfleet/process_pool.hpp"
#include "rdfleet/trajectory_store.hpp"

namespace rdfleet {
namespace {

Bytes pack(const std::vector<double>& v) {
  Bytes out(v.size() * sizeof(double));
  if (!v.empty()) std::memcpy(out.data(), v.data(), out.size());
  return out;
}

std::vector<double> unpack(const Bytes& b) {
  std::vector<double> v(b.size() / sizeof(double));
  if (!v.empty()) std::memcpy(v.data(), b.data(), v.size() * sizeof(double));
  return v;
}

PoolOptions pool_options(const EnsembleOptions& options) {
  PoolOptions p;
  p.workers = options.workers;
  p.crash_on_first_attempt = options.crash_on_first_attempt;
  return p;
}

std::vector<std::uint64_t> iota(std::uint64_t first, std::uint64_t n) {
  std::vector<std::uint64_t> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = first + i;
  return v;
}

[[noreturn]] void raise_task_failure(const TaskOutcome& o, std::uint64_t seed, const std::string& what) {
  throw TaskError(what + " for realization " + std::to_string(o.index) + " (seed " + std::to_string(seed) +
                      ") failed after " + std::to_string(o.attempts) + " attempts: " + o.error,
                  o.index, seed);
}

std::string manifest_key(const std::string& id) { return id + "/manifest.json"; }

void write_manifest(const EnsembleHandle& h) {
  nlohmann::json j;
  j["id"] = h.id;
  j["base_seed"] = h.base_seed;
  j["count"] = h.keys.size();
  j["model_hash"] = to_hex(h.model->model_hash);
  j["model"] = serialize_model(*h.model->spec);
  h.storage->put(manifest_key(h.id), j.dump(2));
}

}  // namespace

const char* to_string(StorageMode mode) {
  switch (mode) {
    case StorageMode::None: return "none";
    case StorageMode::Shared: return "shared";
    case StorageMode::Persistent: return "persistent";
  }
  return "none";
}

StorageMode parse_storage_mode(std::string_view text) {
  if (text == "none") return StorageMode::None;
  if (text == "shared") return StorageMode::Shared;
  if (text == "persistent") return StorageMode::Persistent;
  throw Error("unknown storage mode '" + std::string(text) + "' (expected none, shared or persistent)");
}

std::shared_ptr<const CompiledModel> compile_validated(const ModelSpec& model) {
  const auto diagnostics = validate_model(model);
  if (!diagnostics.empty()) {
    std::string msg = "model '" + model.name + "' is invalid:";
    for (const auto& d : diagnostics) msg += "\n  " + d.code + ": " + d.message;
    throw ModelError(msg);
  }
  return CompiledModel::compile(model);
}

EnsembleHandle create_ensemble(std::string id, const ModelSpec& model, std::uint64_t base_seed, StorageMode mode,
                               std::shared_ptr<StorageBackend> storage) {
  return create_ensemble(std::move(id), compile_validated(model), base_seed, mode, std::move(storage));
}

EnsembleHandle create_ensemble(std::string id, std::shared_ptr<const CompiledModel> model, std::uint64_t base_seed,
                               StorageMode mode, std::shared_ptr<StorageBackend> storage) {
  if (!valid_key(id + "/r0")) throw StorageError(StorageError::Code::InvalidKey, id, "invalid ensemble id '" + id + "'");
  if (mode != StorageMode::None && !storage) throw Error("storage mode " + std::string(to_string(mode)) + " needs a backend");
  EnsembleHandle h;
  h.id = std::move(id);
  h.model = std::move(model);
  h.base_seed = base_seed;
  h.mode = mode;
  h.storage = std::move(storage);
  return h;
}

EnsembleHandle open_ensemble(const std::string& id, StorageMode mode, std::shared_ptr<StorageBackend> storage) {
  if (mode == StorageMode::None || !storage) throw Error("only stored ensembles can be reopened");
  const auto raw = storage->get(manifest_key(id));
  const auto j = nlohmann::json::parse(raw.begin(), raw.end());
  auto model = parse_model(j.at("model").get<std::string>());
  auto h = create_ensemble(id, model, j.at("base_seed").get<std::uint64_t>(), mode, storage);
  const auto count = j.at("count").get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) h.keys.push_back(h.key(i));
  return h;
}

void add_realizations(EnsembleHandle& handle, std::uint64_t n, const EnsembleOptions& options) {
  if (handle.mode == StorageMode::None || !handle.storage) {
    throw Error("add_realizations needs shared or persistent storage");
  }
  if (n == 0) return;
  const std::uint64_t first = handle.keys.size();
  const auto indices = iota(first, n);
  const auto& h = handle;
  auto outcomes = run_tasks(
      indices,
      [&h, &options](std::uint64_t index) {
        auto traj = run_nsm(*h.model, h.seed(index), options.solver);
        h.storage->put(h.key(index), encode_trajectory(traj));
        return Bytes{};
      },
      pool_options(options));
  for (const auto& o : outcomes) {
    if (!o.ok) raise_task_failure(o, handle.seed(o.index), "storing " + handle.key(o.index));
  }
  for (auto i : indices) handle.keys.push_back(handle.key(i));
  write_manifest(handle);
}

std::vector<std::vector<double>> generate_outputs(std::shared_ptr<const CompiledModel> model, std::uint64_t n,
                                                  std::uint64_t base_seed, const std::string& g,
                                                  const EnsembleOptions& options) {
  const auto post = make_postprocessor(g, *model->spec);
  auto outcomes = run_tasks(
      iota(0, n),
      [&](std::uint64_t index) { return pack(post(run_nsm(*model, derive_seed(base_seed, index), options.solver))); },
      pool_options(options));
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (const auto& o : outcomes) {
    if (!o.ok) raise_task_failure(o, derive_seed(base_seed, o.index), "simulation");
    out.push_back(unpack(o.payload));
  }
  return out;
}

StatSummary run_ensemble_nostorage(std::shared_ptr<const CompiledModel> model, std::uint64_t n,
                                   std::uint64_t base_seed, const std::string& g, const EnsembleOptions& options) {
  if (n < 2) throw VarianceUndefined("variance needs at least two realizations, got " + std::to_string(n));
  const auto post = make_postprocessor(g, *model->spec);
  Partial partial(post.arity);
  for (const auto& out : generate_outputs(std::move(model), n, base_seed, g, options)) partial.add(out);
  return summarize(partial, g);
}

StatSummary run_ensemble_nostorage(const ModelSpec& model, std::uint64_t n, std::uint64_t base_seed,
                                   const std::string& g, const EnsembleOptions& options) {
  return run_ensemble_nostorage(compile_validated(model), n, base_seed, g, options);
}

StatSummary map_aggregate(const EnsembleHandle& handle, const std::string& g, const EnsembleOptions& options) {
  if (handle.mode == StorageMode::None) {
    return run_ensemble_nostorage(handle.model, handle.planned, handle.base_seed, g, options);
  }
  const auto count = handle.keys.size();
  if (count < 2) throw VarianceUndefined("variance needs at least two realizations, got " + std::to_string(count));
  const auto post = make_postprocessor(g, *handle.model->spec);
  auto outcomes = run_tasks(
      iota(0, count),
      [&](std::uint64_t index) {
        return pack(post(decode_trajectory(handle.storage->get(handle.keys[index]))));
      },
      pool_options(options));
  Partial partial(post.arity);
  for (const auto& o : outcomes) {
    if (!o.ok) raise_task_failure(o, handle.seed(o.index), "post-processing " + handle.keys[o.index]);
    partial.add(unpack(o.payload));
  }
  return summarize(partial, g);
}

std::string summary_to_json(const StatSummary& s, int indent) {
  nlohmann::json j;
  j["postprocessor"] = s.postprocessor;
  j["K"] = s.count;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["ci95_halfwidth"] = s.ci95;
  return j.dump(indent);
}

}  // namespace rdfleet
