#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace rdfleet {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Undirected connection between two voxels. `a < b` always holds.
struct MeshEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double interface_area = 0.0;  ///< measure of the shared dual face
  double distance = 0.0;        ///< center-to-center distance (geodesic on surfaces)
};

/// Voxelized domain: one well-mixed subvolume per mesh vertex.
///
/// Immutable once constructed; the constructor validates volumes and edges and
/// builds a CSR adjacency so neighbor queries are O(degree).
class Mesh {
 public:
  Mesh() = default;
  Mesh(int dim, std::vector<Vec3> coords, std::vector<double> volumes, std::vector<MeshEdge> edges);

  int dim() const noexcept { return dim_; }
  std::size_t num_voxels() const noexcept { return volumes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<Vec3>& coords() const noexcept { return coords_; }
  const std::vector<double>& volumes() const noexcept { return volumes_; }
  const std::vector<MeshEdge>& edges() const noexcept { return edges_; }
  double total_volume() const noexcept;

  struct Neighbor {
    std::uint32_t voxel;
    std::uint32_t edge;
  };
  std::span<const Neighbor> neighbors(std::size_t voxel) const noexcept {
    return {adjacency_.data() + row_ptr_[voxel], adjacency_.data() + row_ptr_[voxel + 1]};
  }
  bool adjacent(std::size_t i, std::size_t j) const noexcept;

 private:
  int dim_ = 0;
  std::vector<Vec3> coords_;
  std::vector<double> volumes_;
  std::vector<MeshEdge> edges_;
  std::vector<std::uint32_t> row_ptr_;
  std::vector<Neighbor> adjacency_;
};

/// One label per voxel plus the declared label set.
struct SubdomainMap {
  std::vector<int> labels;
  std::set<int> declared;

  static SubdomainMap uniform(std::size_t num_voxels, int label = 1);
  std::vector<std::uint32_t> members(int label) const;
  bool has(int label) const { return declared.count(label) != 0; }
};

inline constexpr int kCytosolLabel = 1;
inline constexpr int kMembraneLabel = 2;

struct LabeledMesh {
  Mesh mesh;
  SubdomainMap subdomains;
};

/// Vertex-centered Cartesian grid. `lengths` and `n_per_axis` must each have `dim` entries.
/// Axis spacing is L/(n-1); boundary voxels get half (per axis) of an interior cell.
Mesh build_cartesian_grid(int dim, std::span<const double> lengths, std::span<const int> n_per_axis);

/// Sphere with a triangulated membrane shell (label 2) over a coarse interior (label 1).
///
/// The membrane is an icosphere subdivided `n_subdiv` times; membrane voxels sit on
/// the sphere. The interior is a center voxel plus `interior_layers` concentric layers
/// on a coarser icosphere (at most one subdivision). Each membrane voxel connects
/// radially to the interior voxel whose direction is nearest.
LabeledMesh build_sphere_shell_mesh(double radius, int n_subdiv, int interior_layers = 1);

/// Parse the line-oriented mesh exchange format (see docs/mesh-format.md).
LabeledMesh parse_mesh(std::istream& in);
LabeledMesh load_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const Mesh& mesh, const SubdomainMap& subdomains);

}  // namespace rdfleet
