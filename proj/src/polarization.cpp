#include "rdfleet/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdfleet {

double PolarizationCaps::mean_cap_fraction() const {
  if (cap_area_fraction.empty()) return 0.0;
  return std::accumulate(cap_area_fraction.begin(), cap_area_fraction.end(), 0.0) /
         static_cast<double>(cap_area_fraction.size());
}

PolarizationCaps build_polarization_caps(const Mesh& mesh, const SubdomainMap& subdomains, double area_fraction,
                                         int membrane_label) {
  if (!(area_fraction > 0.0 && area_fraction <= 1.0)) throw MetricError("cap area fraction must be in (0, 1]");
  PolarizationCaps out;
  out.target_fraction = area_fraction;
  out.membrane = subdomains.members(membrane_label);
  if (out.membrane.empty()) throw MetricError("model has no membrane voxels (label " + std::to_string(membrane_label) + ")");

  const auto& coords = mesh.coords();
  const auto& volumes = mesh.volumes();
  const std::size_t n = out.membrane.size();
  std::vector<Vec3> dir(n);
  double total_area = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& p = coords[out.membrane[a]];
    const double norm = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    dir[a] = norm > 0.0 ? Vec3{p.x / norm, p.y / norm, p.z / norm} : Vec3{};
    total_area += volumes[out.membrane[a]];
  }

  std::vector<std::pair<double, std::uint32_t>> order(n);
  out.caps.resize(n);
  out.cap_area_fraction.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t a = 0; a < n; ++a) {
      const double dot = dir[c].x * dir[a].x + dir[c].y * dir[a].y + dir[c].z * dir[a].z;
      order[a] = {std::acos(std::clamp(dot, -1.0, 1.0)), out.membrane[a]};
    }
    order[c].first = -1.0;  // the center comes first even against rounding
    std::sort(order.begin(), order.end());
    double area = 0.0;
    for (const auto& [angle, voxel] : order) {
      out.caps[c].push_back(voxel);
      area += volumes[voxel];
      if (area >= area_fraction * total_area * (1.0 - 1e-12)) break;
    }
    out.cap_area_fraction[c] = area / total_area;
  }
  return out;
}

double polarization_percent(const PolarizationCaps& caps, std::span<const std::int64_t> snapshot,
                            std::size_t num_species, std::size_t species) {
  std::int64_t total = 0;
  for (auto v : caps.membrane) total += snapshot[v * num_species + species];
  if (total == 0) return 0.0;
  std::int64_t best = 0;
  for (const auto& cap : caps.caps) {
    std::int64_t inside = 0;
    for (auto v : cap) inside += snapshot[v * num_species + species];
    best = std::max(best, inside);
  }
  return 100.0 * static_cast<double>(best) / static_cast<double>(total);
}

double polarization_percent(const Trajectory& traj, const ModelSpec& model, std::size_t t_index,
                            std::string_view species) {
  if (!model.mesh || !model.subdomains) throw MetricError("model has no mesh");
  const auto s = model.species_index(species);
  if (!s) throw MetricError("unknown species '" + std::string(species) + "'");
  if (t_index >= traj.num_times()) throw MetricError("time index out of range");
  const auto caps = build_polarization_caps(*model.mesh, *model.subdomains);
  return polarization_percent(caps, traj.snapshot(t_index), traj.num_species, *s);
}

PolarizationSeries polarization_series(const Trajectory& traj, const PolarizationCaps& caps, std::size_t species,
                                       double window_fraction) {
  PolarizationSeries out;
  const std::size_t t_count = traj.num_times();
  out.t = traj.tspan;
  out.percent.resize(t_count);
  out.membrane_count.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto snap = traj.snapshot(t);
    out.percent[t] = polarization_percent(caps, snap, traj.num_species, species);
    std::int64_t m = 0;
    for (auto v : caps.membrane) m += snap[v * traj.num_species + species];
    out.membrane_count[t] = m;
  }
  if (t_count == 0) return out;
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(t_count))));
  out.window_start = t_count - std::min(window, t_count);
  const double w = static_cast<double>(t_count - out.window_start);
  double sum = 0.0;
  double msum = 0.0;
  for (std::size_t t = out.window_start; t < t_count; ++t) {
    sum += out.percent[t];
    msum += static_cast<double>(out.membrane_count[t]);
  }
  out.window_mean = sum / w;
  out.window_membrane_mean = msum / w;
  double sq = 0.0;
  for (std::size_t t = out.window_start; t < t_count; ++t) sq += (out.percent[t] - out.window_mean) * (out.percent[t] - out.window_mean);
  out.window_std = std::sqrt(sq / w);
  return out;
}

}  // namespace rdfleet
