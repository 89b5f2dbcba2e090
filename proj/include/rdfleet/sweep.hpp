#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdfleet/ensemble.hpp"

namespace rdfleet {

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// Cartesian product of the axes; one ensemble of `ensemble_size` per point.
struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::uint64_t ensemble_size = 0;
  std::string postprocessor;
  std::uint64_t base_seed = 0;
  /// Namespace for stored trajectories and the persisted summary table.
  std::string id = "sweep";
};

using ParamPoint = std::vector<std::pair<std::string, double>>;

struct SweepRow {
  ParamPoint point;
  std::uint64_t point_seed = 0;
  std::optional<StatSummary> summary;  ///< empty when the point failed
  std::string error;
};

/// Points in cartesian order, last axis varying fastest.
std::vector<ParamPoint> sweep_points(const SweepSpec& sweep);

/// Base seed of a point: derive_seed(base, XXH64 of the point's canonical text), so a
/// point's ensemble does not depend on where the point sits in the sweep.
std::uint64_t point_seed(std::uint64_t base, const ParamPoint& point);

using ModelFactory = std::function<ModelSpec(const ParamPoint&)>;

/// Run one ensemble per point. With StorageMode::None all (point, realization) tasks
/// share one pool and only summaries persist (written to `<id>/summary.json` when a
/// backend is given). Stored modes run add_realizations + map_aggregate per point
/// under namespace `<id>-p<point index>`. A failing point is recorded in its row and
/// the sweep continues.
std::vector<SweepRow> run_parameter_sweep(const ModelFactory& factory, const SweepSpec& sweep,
                                          const EnsembleOptions& options, StorageMode mode,
                                          std::shared_ptr<StorageBackend> storage = nullptr);

/// Sweep over declared parameters of `model`; throws ModelError for unknown names.
std::vector<SweepRow> run_parameter_sweep(const ModelSpec& model, const SweepSpec& sweep,
                                          const EnsembleOptions& options, StorageMode mode,
                                          std::shared_ptr<StorageBackend> storage = nullptr);

/// CSV columns: <param names...>,stat_name,component,mean,variance,ci95_halfwidth,K
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows, int indent = 2);

}  // namespace rdfleet
