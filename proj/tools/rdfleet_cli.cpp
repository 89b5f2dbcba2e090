// rdfleet command-line front end.
//
// Exit codes: 0 success, 1 user error (bad flags, invalid model, too few
// realizations), 2 runtime failure (simulation, storage, I/O).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "rdfleet/bench.hpp"
#include "rdfleet/ensemble.hpp"
#include "rdfleet/model_io.hpp"
#include "rdfleet/object_store.hpp"
#include "rdfleet/polarization.hpp"
#include "rdfleet/solver.hpp"
#include "rdfleet/sweep.hpp"
#include "rdfleet/trajectory_store.hpp"
#include "rdfleet/yeast.hpp"

namespace fs = std::filesystem;
using namespace rdfleet;

namespace {

constexpr int kUserError = 1;
constexpr int kRuntimeError = 2;
constexpr const char* kYeastPreset = "yeast-polarization";

struct UserError : Error {
  using Error::Error;
};

struct Common {
  std::string model_path;
  std::string preset;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  std::string storage = "none";
  std::string out = "rdfleet-out";
  std::string config;
  std::string id = "ensemble";

  // yeast preset knobs
  std::uint64_t n_total = 600;
  YeastParams params = YeastParams::calibrated();
  YeastGeometry geometry;
};

void add_model_flags(CLI::App* app, Common& c) {
  app->add_option("--model", c.model_path, "model file");
  app->add_option("--preset", c.preset, "built-in model (yeast-polarization)");
  app->add_option("--N", c.n_total, "yeast preset: total Cdc42 molecules");
  app->add_option("--k-on", c.params.k_on, "yeast preset: k_on");
  app->add_option("--k-off", c.params.k_off, "yeast preset: k_off");
  app->add_option("--k-fb", c.params.k_fb, "yeast preset: k_fb");
  app->add_option("--d-cyt", c.params.d_cyt, "yeast preset: cytosolic diffusion constant");
  app->add_option("--d-mem", c.params.d_mem, "yeast preset: membrane diffusion constant");
  app->add_option("--subdiv", c.geometry.mesh_subdiv, "yeast preset: membrane icosphere subdivisions");
  app->add_option("--t-end", c.geometry.t_end, "yeast preset: final output time");
  app->add_option("--n-out", c.geometry.n_out, "yeast preset: number of output times");
}

// `bench` takes a worker list instead of a single count.
void add_run_flags(CLI::App* app, Common& c, bool single_worker_count = true) {
  app->add_option("--seed", c.seed, "base seed");
  if (single_worker_count) app->add_option("--workers", c.workers, "worker processes")->check(CLI::PositiveNumber);
  app->add_option("--storage", c.storage, "none, shared or persistent")
      ->check(CLI::IsMember({"none", "shared", "persistent"}));
  app->add_option("--out", c.out, "output directory");
  app->add_option("--config", c.config, "INI file with a [storage] section");
}

ModelSpec load_selected_model(const Common& c) {
  if (!c.model_path.empty() && !c.preset.empty()) throw UserError("give either --model or --preset, not both");
  if (!c.model_path.empty()) {
    if (!fs::is_regular_file(c.model_path)) throw UserError("model file not found: " + c.model_path);
    return load_model(c.model_path);
  }
  if (c.preset == kYeastPreset) return build_yeast_model(c.n_total, c.params, c.geometry);
  if (c.preset.empty()) throw UserError("a model is required (--model <file> or --preset yeast-polarization)");
  throw UserError("unknown preset '" + c.preset + "'");
}

std::shared_ptr<StorageBackend> open_storage(const Common& c, StorageMode mode) {
  if (mode == StorageMode::None) return nullptr;
  StorageConfig config = c.config.empty() ? StorageConfig::from_env() : StorageConfig::load(c.config);
  if (mode == StorageMode::Shared) {
    const fs::path dir = config.shared_dir.empty() ? fs::path(c.out) / "shared" : config.shared_dir;
    return std::make_shared<SharedStorage>(dir);
  }
  if (config.endpoint.empty()) {
    throw UserError("persistent storage needs an endpoint (RF_STORAGE_ENDPOINT or [storage] endpoint)");
  }
  return std::make_shared<PersistentStorage>(config);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoul(part));
    } catch (const std::exception&) {
      throw UserError("'" + part + "' is not a count");
    }
  }
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UserError("'" + part + "' is not a number");
    }
  }
  return out;
}

int cmd_validate(const Common& c) {
  const auto model = load_selected_model(c);
  const auto diagnostics = validate_model(model);
  for (const auto& d : diagnostics) std::cout << d.code << ": " << d.message << '\n';
  if (!diagnostics.empty()) return kUserError;
  std::cout << "model '" << model.name << "' is valid (" << model.num_voxels() << " voxels, " << model.species.size()
            << " species, " << model.reactions.size() << " reactions)\n";
  return 0;
}

int cmd_run(const Common& c, const std::string& solver, const std::string& reschedule, const std::string& name) {
  const auto model = load_selected_model(c);
  const auto compiled = compile_validated(model);
  SolverOptions options;
  options.reschedule = reschedule == "redraw" ? Reschedule::Redraw : Reschedule::Rescale;
  const auto traj = solver == "direct" ? run_direct_ssa(*compiled, c.seed, options) : run_nsm(*compiled, c.seed, options);
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / name;
  save_trajectory(traj, path);
  std::cout << path.string() << '\n'
            << "events: " << traj.info.reaction_events << " reaction, " << traj.info.diffusion_events
            << " diffusion; " << traj.info.wall_seconds << " s\n";
  return 0;
}

int cmd_ensemble(const Common& c, std::uint64_t n, const std::string& g) {
  const auto model = load_selected_model(c);
  const auto mode = parse_storage_mode(c.storage);
  EnsembleOptions options;
  options.workers = c.workers;
  if (mode == StorageMode::None) {
    if (g.empty()) throw UserError("--storage none computes statistics on the fly and needs --g");
    const auto summary = run_ensemble_nostorage(model, n, c.seed, g, options);
    const auto json = summary_to_json(summary);
    write_text(fs::path(c.out) / (c.id + "-summary.json"), json + "\n");
    std::cout << json << '\n';
    return 0;
  }
  // Reopen an existing ensemble of the same id so repeated calls grow it.
  const auto storage = open_storage(c, mode);
  std::optional<EnsembleHandle> existing;
  try {
    existing = open_ensemble(c.id, mode, storage);
  } catch (const StorageError& e) {
    if (e.code() != StorageError::Code::NotFound) throw;
  }
  auto handle = existing ? *existing : create_ensemble(c.id, model, c.seed, mode, storage);
  add_realizations(handle, n, options);
  std::cout << "ensemble '" << handle.id << "' now holds " << handle.keys.size() << " realizations in "
            << to_string(mode) << " storage\n";
  if (!g.empty()) std::cout << summary_to_json(map_aggregate(handle, g, options)) << '\n';
  return 0;
}

int cmd_postprocess(const Common& c, const std::string& g) {
  const auto mode = parse_storage_mode(c.storage);
  if (mode == StorageMode::None) throw UserError("postprocess reads stored realizations; use --storage shared|persistent");
  const auto handle = open_ensemble(c.id, mode, open_storage(c, mode));
  EnsembleOptions options;
  options.workers = c.workers;
  const auto summary = map_aggregate(handle, g, options);
  const auto json = summary_to_json(summary);
  write_text(fs::path(c.out) / (c.id + "-summary.json"), json + "\n");
  std::cout << json << '\n';
  return 0;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& params, std::uint64_t n, const std::string& g) {
  const auto mode = parse_storage_mode(c.storage);
  EnsembleOptions options;
  options.workers = c.workers;
  SweepSpec sweep;
  sweep.ensemble_size = n;
  sweep.base_seed = c.seed;
  sweep.id = c.id;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw UserError("--param expects name=v1,v2,...");
    sweep.axes.push_back({p.substr(0, eq), parse_values(p.substr(eq + 1))});
  }
  if (sweep.axes.empty()) throw UserError("a sweep needs at least one --param");
  fs::create_directories(c.out);

  if (c.preset == kYeastPreset && sweep.axes.size() == 1 && sweep.axes[0].name == "N") {
    if (mode != StorageMode::None) throw UserError("the yeast switch sweep runs without storage");
    std::vector<std::uint64_t> ns;
    for (double v : sweep.axes[0].values) ns.push_back(static_cast<std::uint64_t>(v));
    SwitchSweepOptions so;
    so.geometry = c.geometry;
    so.base_seed = c.seed;
    so.ensemble = options;
    const auto points = run_switch_sweep(ns, c.params, n, so);
    std::ofstream csv(fs::path(c.out) / "switch.csv");
    write_switch_csv(csv, points);
    write_text(fs::path(c.out) / "switch.json", switch_to_json(points, c.params) + "\n");
    write_switch_csv(std::cout, points);
    for (const auto& p : points) {
      if (!p.ok) return kRuntimeError;
    }
    return 0;
  }

  if (g.empty()) throw UserError("--g is required");
  sweep.postprocessor = g;
  const auto model = load_selected_model(c);
  const auto rows = run_parameter_sweep(model, sweep, options, mode, open_storage(c, mode));
  std::ofstream csv(fs::path(c.out) / "sweep.csv");
  write_sweep_csv(csv, rows);
  write_text(fs::path(c.out) / "sweep.json", sweep_to_json(rows) + "\n");
  write_sweep_csv(std::cout, rows);
  bool all_ok = true;
  for (const auto& r : rows) {
    if (!r.summary) {
      all_ok = false;
      std::cerr << "point failed: " << r.error << '\n';
    }
  }
  return all_ok ? 0 : kRuntimeError;
}

int cmd_bench(const Common& c, const std::string& mode_text, const std::string& workers, std::uint64_t jobs,
              const std::string& report_path) {
  const auto mode = parse_storage_mode(c.storage);
  auto workload = yeast_bench_workload(c.n_total, c.geometry.t_end, c.geometry.mesh_subdiv);
  if (!c.model_path.empty()) {
    workload.name = c.model_path;
    workload.model = load_model(c.model_path);
  }
  workload.base_seed = c.seed;
  const auto counts = parse_counts(workers);
  const auto report = mode_text == "weak" ? bench_weak(workload, jobs, counts, mode, open_storage(c, mode))
                                          : bench_strong(workload, jobs, counts, mode, open_storage(c, mode));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  write_bench_csv(std::cout, report);
  if (!report_path.empty()) {
    write_text(report_path, bench_to_json(report) + "\n");
    std::ofstream csv(fs::path(report_path).replace_extension(".csv"));
    write_bench_csv(csv, report);
  }
  return 0;
}

int cmd_export(const Common& c, const std::string& trajectory, const std::string& csv, std::optional<std::size_t> snapshot) {
  const auto model = load_selected_model(c);
  const auto traj = load_trajectory(trajectory);
  if (csv.empty() && !snapshot) throw UserError("export needs --csv <path> and/or --snapshot <t_index>");
  if (!csv.empty()) export_csv(traj, model, fs::path(csv));
  if (snapshot) {
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / ("snapshot_t" + std::to_string(*snapshot) + ".csv");
    export_mesh_snapshot(traj, model, *snapshot, path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const UserError*>(&e) || dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ModelError*>(&e) ||
      dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const VarianceUndefined*>(&e) ||
      dynamic_cast<const PostProcessorError*>(&e)) {
    return kUserError;
  }
  if (const auto* s = dynamic_cast<const StorageError*>(&e)) {
    return s->code() == StorageError::Code::InvalidKey ? kUserError : kRuntimeError;
  }
  return kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdfleet: spatial stochastic simulation and ensemble runner"};
  app.require_subcommand(1);
  Common c;

  auto* validate = app.add_subcommand("validate", "check a model and print diagnostics");
  add_model_flags(validate, c);

  std::string solver = "nsm";
  std::string reschedule = "rescale";
  std::string name = "trajectory.rftraj";
  auto* run = app.add_subcommand("run", "simulate one realization to a trajectory file");
  add_model_flags(run, c);
  add_run_flags(run, c);
  run->add_option("--solver", solver, "nsm or direct")->check(CLI::IsMember({"nsm", "direct"}));
  run->add_option("--reschedule", reschedule, "rescale or redraw")->check(CLI::IsMember({"rescale", "redraw"}));
  run->add_option("--name", name, "output file name inside --out");

  std::uint64_t n = 10;
  std::string g;
  auto* ensemble = app.add_subcommand("ensemble", "generate an ensemble (fused statistics or stored realizations)");
  add_model_flags(ensemble, c);
  add_run_flags(ensemble, c);
  ensemble->add_option("--n", n, "realizations to add");
  ensemble->add_option("--g", g, "post-processor, e.g. final_count:A");
  ensemble->add_option("--id", c.id, "ensemble id (storage namespace)");

  auto* postprocess = app.add_subcommand("postprocess", "aggregate a post-processor over a stored ensemble");
  add_run_flags(postprocess, c);
  postprocess->add_option("--g", g, "post-processor")->required();
  postprocess->add_option("--id", c.id, "ensemble id")->required();

  std::vector<std::string> params;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep, one ensemble per cartesian point");
  add_model_flags(sweep, c);
  add_run_flags(sweep, c);
  sweep->add_option("--param", params, "name=v1,v2,... (repeatable)");
  sweep->add_option("--n", n, "realizations per point");
  sweep->add_option("--g", g, "post-processor");
  sweep->add_option("--id", c.id, "sweep id");

  std::string bench_mode = "strong";
  std::string bench_workers = "1,2,4,8";
  std::uint64_t jobs = 100;
  std::string report;
  auto* bench = app.add_subcommand("bench", "strong or weak scaling benchmark");
  add_model_flags(bench, c);
  add_run_flags(bench, c, false);
  bench->add_option("--mode", bench_mode, "strong or weak")->check(CLI::IsMember({"strong", "weak"}));
  bench->add_option("--workers", bench_workers, "comma-separated worker counts");
  bench->add_option("--jobs", jobs, "total jobs (strong) or jobs per worker (weak)");
  bench->add_option("--report", report, "JSON report path (a CSV is written next to it)");

  std::string trajectory;
  std::string csv;
  std::optional<std::size_t> snapshot;
  auto* export_cmd = app.add_subcommand("export", "export a trajectory to CSV or a mesh snapshot");
  add_model_flags(export_cmd, c);
  export_cmd->add_option("--trajectory", trajectory, "trajectory file")->required();
  export_cmd->add_option("--csv", csv, "CSV path (t,species,voxel,count)");
  export_cmd->add_option("--snapshot", snapshot, "output time index for a per-voxel snapshot");
  export_cmd->add_option("--out", c.out, "output directory for snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUserError;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*run) return cmd_run(c, solver, reschedule, name);
    if (*ensemble) return cmd_ensemble(c, n, g);
    if (*postprocess) return cmd_postprocess(c, g);
    if (*sweep) return cmd_sweep(c, params, n, g);
    if (*bench) return cmd_bench(c, bench_mode, bench_workers, jobs, report);
    if (*export_cmd) return cmd_export(c, trajectory, csv, snapshot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return classify(e);
  }
  return kUserError;
}
