#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdfleet/hash.hpp"

namespace rdfleet {

/// Run metadata that is reported but not persisted in trajectory files.
struct RunInfo {
  std::string solver;
  double wall_seconds = 0.0;
  std::uint64_t reaction_events = 0;
  std::uint64_t diffusion_events = 0;
  double max_resync_drift = 0.0;  ///< largest relative propensity drift seen at a resync
};

/// One realization: a K x S count matrix for each output time.
struct Trajectory {
  std::vector<double> tspan;
  std::size_t num_voxels = 0;
  std::size_t num_species = 0;
  std::vector<std::int64_t> counts;  ///< [t][voxel][species], row-major
  Sha256Digest model_hash{};
  std::uint64_t seed = 0;
  RunInfo info;

  Trajectory() = default;
  Trajectory(std::vector<double> times, std::size_t k, std::size_t s)
      : tspan(std::move(times)), num_voxels(k), num_species(s), counts(tspan.size() * k * s, 0) {}

  std::size_t num_times() const noexcept { return tspan.size(); }
  std::span<const std::int64_t> snapshot(std::size_t t) const noexcept {
    return {counts.data() + t * num_voxels * num_species, num_voxels * num_species};
  }
  std::int64_t at(std::size_t t, std::size_t voxel, std::size_t species) const noexcept {
    return counts[(t * num_voxels + voxel) * num_species + species];
  }

  /// Compares everything a trajectory file records; `info` is ignored.
  bool operator==(const Trajectory& o) const {
    return tspan == o.tspan && num_voxels == o.num_voxels && num_species == o.num_species && counts == o.counts &&
           model_hash == o.model_hash && seed == o.seed;
  }
};

}  // namespace rdfleet
