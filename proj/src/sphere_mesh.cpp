#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "rdfleet/error.hpp"
#include "rdfleet/mesh.hpp"

namespace rdfleet {
namespace {

struct Dir {
  double x, y, z;
};

Dir normalize(Dir d) {
  const double n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  return {d.x / n, d.y / n, d.z / n};
}
double dot(const Dir& a, const Dir& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Dir cross(const Dir& a, const Dir& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double angle(const Dir& a, const Dir& b) {
  // atan2 form stays accurate for small angles
  const Dir c = cross(a, b);
  return std::atan2(std::sqrt(dot(c, c)), dot(a, b));
}

using Tri = std::array<std::uint32_t, 3>;

struct Icosphere {
  std::vector<Dir> dirs;
  std::vector<std::vector<Tri>> levels;  // triangles per subdivision level
};

Icosphere make_icosphere(int n_subdiv) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosphere ico;
  for (const Dir& d : {Dir{-1, t, 0}, Dir{1, t, 0}, Dir{-1, -t, 0}, Dir{1, -t, 0}, Dir{0, -1, t}, Dir{0, 1, t},
                       Dir{0, -1, -t}, Dir{0, 1, -t}, Dir{t, 0, -1}, Dir{t, 0, 1}, Dir{-t, 0, -1}, Dir{-t, 0, 1}}) {
    ico.dirs.push_back(normalize(d));
  }
  ico.levels.push_back({{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}});
  for (int level = 0; level < n_subdiv; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Dir& p = ico.dirs[a];
      const Dir& q = ico.dirs[b];
      const auto idx = static_cast<std::uint32_t>(ico.dirs.size());
      ico.dirs.push_back(normalize({p.x + q.x, p.y + q.y, p.z + q.z}));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Tri> next;
    for (const Tri& f : ico.levels.back()) {
      const auto ab = mid(f[0], f[1]);
      const auto bc = mid(f[1], f[2]);
      const auto ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    ico.levels.push_back(std::move(next));
  }
  return ico;
}

std::size_t vertex_count(int level) { return 10 * (std::size_t{1} << (2 * level)) + 2; }

/// Solid angle per vertex (one third of each incident spherical triangle) and the
/// unit-sphere length of each edge's dual segment (edge midpoint to adjacent triangle centroids).
struct SphericalDual {
  std::vector<double> solid_angle;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> dual_length;
};

SphericalDual spherical_dual(const std::vector<Dir>& dirs, const std::vector<Tri>& tris, std::size_t n_vertices) {
  SphericalDual d;
  d.solid_angle.assign(n_vertices, 0.0);
  for (const Tri& f : tris) {
    const Dir& a = dirs[f[0]];
    const Dir& b = dirs[f[1]];
    const Dir& c = dirs[f[2]];
    const double omega = 2.0 * std::atan2(std::abs(dot(a, cross(b, c))), 1.0 + dot(a, b) + dot(b, c) + dot(c, a));
    for (auto v : f) d.solid_angle[v] += omega / 3.0;
    const Dir g = normalize({a.x + b.x + c.x, a.y + b.y + c.y, a.z + b.z + c.z});
    for (int e = 0; e < 3; ++e) {
      const auto u = f[e];
      const auto w = f[(e + 1) % 3];
      const Dir m = normalize({dirs[u].x + dirs[w].x, dirs[u].y + dirs[w].y, dirs[u].z + dirs[w].z});
      d.dual_length[std::minmax(u, w)] += angle(m, g);
    }
  }
  return d;
}

}  // namespace

LabeledMesh build_sphere_shell_mesh(double radius, int n_subdiv, int interior_layers) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("sphere radius must be positive");
  if (n_subdiv < 0 || n_subdiv > 7) throw GeometryError("sphere subdivision must be in [0, 7]");
  if (interior_layers < 1) throw GeometryError("sphere needs at least one interior layer");

  const Icosphere ico = make_icosphere(n_subdiv);
  const int coarse_level = std::min(n_subdiv, 1);
  const std::size_t n_fine = vertex_count(n_subdiv);
  const std::size_t n_coarse = vertex_count(coarse_level);
  const SphericalDual fine = spherical_dual(ico.dirs, ico.levels[n_subdiv], n_fine);
  const SphericalDual coarse = spherical_dual(ico.dirs, ico.levels[coarse_level], n_coarse);

  double mean_arc = 0.0;
  for (const auto& [key, len] : fine.dual_length) mean_arc += angle(ico.dirs[key.first], ico.dirs[key.second]);
  mean_arc *= radius / static_cast<double>(fine.dual_length.size());
  // membrane voxels span [R - delta, R]
  const double delta = std::min(0.5 * mean_arc, 0.25 * radius);
  const double r_outer_interior = radius - 2.0 * delta;

  std::vector<double> layer_r(interior_layers);
  for (int l = 0; l < interior_layers; ++l) layer_r[l] = r_outer_interior * (l + 1) / interior_layers;
  std::vector<double> bound(interior_layers + 1);  // bound[l] = inner radius of layer l; bound[L] = R - delta
  bound[0] = 0.5 * layer_r[0];
  for (int l = 1; l < interior_layers; ++l) bound[l] = 0.5 * (layer_r[l - 1] + layer_r[l]);
  bound[interior_layers] = radius - delta;

  std::vector<std::uint32_t> parent(n_fine);
  std::vector<double> coarse_omega(n_coarse, 0.0);
  for (std::size_t v = 0; v < n_fine; ++v) {
    std::uint32_t best = 0;
    double best_dot = -2.0;
    for (std::uint32_t p = 0; p < n_coarse; ++p) {
      const double d = dot(ico.dirs[v], ico.dirs[p]);
      if (d > best_dot + 1e-12) {
        best_dot = d;
        best = p;
      }
    }
    parent[v] = best;
    coarse_omega[best] += fine.solid_angle[v];
  }

  const std::size_t k = n_fine + n_coarse * interior_layers + 1;
  const auto interior_id = [&](int layer, std::size_t p) {
    return static_cast<std::uint32_t>(n_fine + n_coarse * layer + p);
  };
  const auto center = static_cast<std::uint32_t>(k - 1);

  std::vector<Vec3> coords(k);
  std::vector<double> volumes(k);
  std::vector<int> labels(k, kCytosolLabel);
  std::vector<MeshEdge> edges;

  const double r_in_membrane = radius - delta;
  for (std::size_t v = 0; v < n_fine; ++v) {
    const Dir& d = ico.dirs[v];
    coords[v] = {radius * d.x, radius * d.y, radius * d.z};
    volumes[v] = fine.solid_angle[v] / 3.0 * (std::pow(radius, 3) - std::pow(r_in_membrane, 3));
    labels[v] = kMembraneLabel;
  }
  for (const auto& [key, len] : fine.dual_length) {
    edges.push_back({key.first, key.second, len * (radius * radius - r_in_membrane * r_in_membrane) / 2.0,
                     radius * angle(ico.dirs[key.first], ico.dirs[key.second])});
  }

  for (int l = 0; l < interior_layers; ++l) {
    const double a = bound[l];
    const double b = bound[l + 1];
    for (std::size_t p = 0; p < n_coarse; ++p) {
      const Dir& d = ico.dirs[p];
      const auto id = interior_id(l, p);
      coords[id] = {layer_r[l] * d.x, layer_r[l] * d.y, layer_r[l] * d.z};
      volumes[id] = coarse_omega[p] / 3.0 * (b * b * b - a * a * a);
      if (l + 1 < interior_layers) {
        edges.push_back({id, interior_id(l + 1, p), coarse_omega[p] * b * b, layer_r[l + 1] - layer_r[l]});
      }
      if (l == 0) edges.push_back({id, center, coarse_omega[p] * a * a, layer_r[0]});
    }
    for (const auto& [key, len] : coarse.dual_length) {
      edges.push_back({interior_id(l, key.first), interior_id(l, key.second), len * (b * b - a * a) / 2.0,
                       layer_r[l] * angle(ico.dirs[key.first], ico.dirs[key.second])});
    }
  }
  for (std::size_t v = 0; v < n_fine; ++v) {
    const auto p = interior_id(interior_layers - 1, parent[v]);
    const Vec3& m = coords[v];
    const Vec3& q = coords[p];
    const double dist = std::sqrt((m.x - q.x) * (m.x - q.x) + (m.y - q.y) * (m.y - q.y) + (m.z - q.z) * (m.z - q.z));
    edges.push_back({static_cast<std::uint32_t>(v), p, fine.solid_angle[v] * r_in_membrane * r_in_membrane, dist});
  }
  coords[center] = {0.0, 0.0, 0.0};
  volumes[center] = 4.0 / 3.0 * std::numbers::pi * std::pow(bound[0], 3);

  Mesh mesh(3, std::move(coords), std::move(volumes), std::move(edges));
  SubdomainMap sub{std::move(labels), {kCytosolLabel, kMembraneLabel}};
  return {std::move(mesh), std::move(sub)};
}

}  // namespace rdfleet
