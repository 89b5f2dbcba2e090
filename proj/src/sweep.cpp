#include "rdfleet/sweep.hpp"

#include <json.hpp>

#include <cstring>
#include <ostream>

#include "rdfleet/hash.hpp"
#include "rdfleet/model_io.hpp"
#include "rdfleet/postprocess.hpp"
#include "rdfleet/process_pool.hpp"

namespace rdfleet {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json point_json(const ParamPoint& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : p) j[name] = value;
  return j;
}

}  // namespace

std::vector<ParamPoint> sweep_points(const SweepSpec& sweep) {
  if (sweep.axes.empty()) throw Error("a sweep needs at least one parameter axis");
  std::vector<ParamPoint> points{ParamPoint{}};
  for (const auto& axis : sweep.axes) {
    if (axis.values.empty()) throw Error("sweep axis '" + axis.name + "' has no values");
    std::vector<ParamPoint> next;
    for (const auto& p : points) {
      for (double v : axis.values) {
        auto q = p;
        q.emplace_back(axis.name, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::uint64_t point_seed(std::uint64_t base, const ParamPoint& point) {
  std::string text;
  for (const auto& [name, value] : point) text += name + "=" + format_double(value) + ";";
  return derive_seed(base, xxh64(text, 0));
}

std::vector<SweepRow> run_parameter_sweep(const ModelFactory& factory, const SweepSpec& sweep,
                                          const EnsembleOptions& options, StorageMode mode,
                                          std::shared_ptr<StorageBackend> storage) {
  const auto points = sweep_points(sweep);
  std::vector<SweepRow> rows(points.size());
  std::vector<std::shared_ptr<const CompiledModel>> models(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    rows[p].point = points[p];
    rows[p].point_seed = point_seed(sweep.base_seed, points[p]);
    try {
      models[p] = compile_validated(factory(points[p]));
      make_postprocessor(sweep.postprocessor, *models[p]->spec);
    } catch (const std::exception& e) {
      rows[p].error = e.what();
    }
  }

  if (mode == StorageMode::None) {
    // One pool over every (point, realization) pair; a task failing twice fails its point.
    const std::uint64_t n = sweep.ensemble_size;
    std::vector<std::uint64_t> tasks;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (!models[p]) continue;
      for (std::uint64_t r = 0; r < n; ++r) tasks.push_back(p * n + r);
    }
    std::vector<PostProcessor> posts(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (models[p]) posts[p] = make_postprocessor(sweep.postprocessor, *models[p]->spec);
    }
    const auto outcomes = run_tasks(
        tasks,
        [&](std::uint64_t task) {
          const auto p = task / n;
          const auto traj = run_nsm(*models[p], derive_seed(rows[p].point_seed, task % n), options.solver);
          const auto g = posts[p](traj);
          Bytes out(g.size() * sizeof(double));
          if (!g.empty()) std::memcpy(out.data(), g.data(), out.size());
          return out;
        },
        PoolOptions{options.workers, 2, options.crash_on_first_attempt});
    std::vector<Partial> partials(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) partials[p] = Partial(posts[p].arity);
    for (const auto& o : outcomes) {
      const auto p = o.index / n;
      if (!rows[p].error.empty()) continue;
      if (!o.ok) {
        rows[p].error = "realization " + std::to_string(o.index % n) + " failed: " + o.error;
        continue;
      }
      std::vector<double> g(o.payload.size() / sizeof(double));
      if (!g.empty()) std::memcpy(g.data(), o.payload.data(), g.size() * sizeof(double));
      try {
        partials[p].add(g);
      } catch (const std::exception& e) {
        rows[p].error = e.what();
      }
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (!rows[p].error.empty()) continue;
      try {
        rows[p].summary = summarize(partials[p], sweep.postprocessor);
      } catch (const std::exception& e) {
        rows[p].error = e.what();
      }
    }
  } else {
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (!rows[p].error.empty()) continue;
      try {
        auto handle = create_ensemble(sweep.id + "-p" + std::to_string(p), *models[p]->spec, rows[p].point_seed, mode,
                                      storage);
        add_realizations(handle, sweep.ensemble_size, options);
        rows[p].summary = map_aggregate(handle, sweep.postprocessor, options);
      } catch (const std::exception& e) {
        rows[p].error = e.what();
      }
    }
  }

  if (storage) storage->put(sweep.id + "/summary.json", sweep_to_json(rows));
  return rows;
}

std::vector<SweepRow> run_parameter_sweep(const ModelSpec& model, const SweepSpec& sweep,
                                          const EnsembleOptions& options, StorageMode mode,
                                          std::shared_ptr<StorageBackend> storage) {
  for (const auto& axis : sweep.axes) {
    if (!model.parameter(axis.name)) throw ModelError("sweep axis '" + axis.name + "' is not a model parameter");
  }
  return run_parameter_sweep(
      [&model](const ParamPoint& point) {
        ModelSpec m = model;
        for (const auto& [name, value] : point) m.set_parameter(name, value);
        return m;
      },
      sweep, options, mode, std::move(storage));
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  if (rows.empty()) return;
  for (const auto& [name, value] : rows.front().point) out << csv_field(name) << ',';
  out << "stat_name,component,mean,variance,ci95_halfwidth,K\n";
  for (const auto& row : rows) {
    if (!row.summary) continue;
    const auto& s = *row.summary;
    for (std::size_t c = 0; c < s.mean.size(); ++c) {
      for (const auto& [name, value] : row.point) out << format_double(value) << ',';
      out << csv_field(s.postprocessor) << ',' << c << ',' << format_double(s.mean[c]) << ','
          << format_double(s.variance[c]) << ',' << format_double(s.ci95[c]) << ',' << s.count << '\n';
    }
  }
}

std::string sweep_to_json(const std::vector<SweepRow>& rows, int indent) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["params"] = point_json(row.point);
    r["point_seed"] = row.point_seed;
    r["ok"] = row.summary.has_value();
    if (row.summary) r["summary"] = nlohmann::json::parse(summary_to_json(*row.summary, -1));
    if (!row.error.empty()) r["error"] = row.error;
    j.push_back(std::move(r));
  }
  return j.dump(indent);
}

}  // namespace rdfleet
