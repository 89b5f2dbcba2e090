#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "rdfleet/error.hpp"
#include "rdfleet/model.hpp"
#include "rdfleet/rng.hpp"

namespace rdfleet::detail {

inline double checked_propensity(const CompiledReaction& r, std::span<const std::int64_t> counts, double volume,
                                 std::size_t voxel, double t) {
  const double a = r.propensity(counts, volume);
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw ModelRuntimeError("reaction '" + r.name + "' has propensity " + std::to_string(a) + " in voxel " +
                                std::to_string(voxel) + " at t=" + std::to_string(t),
                            voxel, r.name, t);
  }
  return a;
}

/// Sum of reaction propensities in one voxel, in voxel_reactions order.
inline double voxel_reaction_rate(const CompiledModel& m, std::span<const std::int64_t> counts, double volume,
                                  std::size_t voxel, double t) {
  double a = 0.0;
  for (auto r : m.voxel_reactions[voxel]) a += checked_propensity(m.reactions[r], counts, volume, voxel, t);
  return a;
}

inline double voxel_diffusion_rate(const CompiledModel& m, std::span<const std::int64_t> counts, std::size_t voxel) {
  double d = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > 0) d += m.diffusion.exit_rate(s, voxel) * static_cast<double>(counts[s]);
  }
  return d;
}

/// Pick the reaction channel for target `r` in [0, a_total) by linear search.
/// Floating-point shortfall falls back to the last channel with positive propensity.
inline std::uint32_t pick_reaction(const CompiledModel& m, std::span<const std::int64_t> counts, double volume,
                                   std::size_t voxel, double r, double t) {
  std::uint32_t last = m.voxel_reactions[voxel].front();
  for (auto idx : m.voxel_reactions[voxel]) {
    const double a = checked_propensity(m.reactions[idx], counts, volume, voxel, t);
    if (a <= 0.0) continue;
    last = idx;
    if (r < a) return idx;
    r -= a;
  }
  return last;
}

/// Pick (species, destination) for a diffusion event out of `voxel`. Returns nullopt
/// when no molecule can jump, which only happens if an incremental total drifted.
inline std::optional<std::pair<std::size_t, std::uint32_t>> pick_jump(const CompiledModel& m, std::span<const std::int64_t> counts,
                                                       std::size_t voxel, double r, RandomStream& rng) {
  std::size_t species = counts.size();
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] <= 0) continue;
    const double w = m.diffusion.exit_rate(s, voxel) * static_cast<double>(counts[s]);
    if (w <= 0.0) continue;
    species = s;
    if (r < w) break;
    r -= w;
  }
  if (species == counts.size()) return std::nullopt;
  const auto row = m.diffusion.row(species, voxel);
  double target = rng.uniform() * m.diffusion.exit_rate(species, voxel);
  std::uint32_t dest = row.back().dest;
  for (const auto& jump : row) {
    if (target < jump.rate) {
      dest = jump.dest;
      break;
    }
    target -= jump.rate;
  }
  return std::pair{species, dest};
}

inline void apply_reaction(const CompiledReaction& r, std::span<std::int64_t> counts) {
  for (const auto& [s, delta] : r.change) counts[s] += delta;
}

}  // namespace rdfleet::detail
