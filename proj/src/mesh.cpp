#include "rdfleet/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "rdfleet/error.hpp"

namespace rdfleet {

Mesh::Mesh(int dim, std::vector<Vec3> coords, std::vector<double> volumes, std::vector<MeshEdge> edges)
    : dim_(dim), coords_(std::move(coords)), volumes_(std::move(volumes)), edges_(std::move(edges)) {
  if (dim_ < 1 || dim_ > 3) throw GeometryError("mesh dimension must be 1, 2 or 3");
  if (coords_.size() != volumes_.size()) throw GeometryError("mesh: coordinate and volume counts differ");
  if (volumes_.empty()) throw GeometryError("mesh has no voxels");
  for (std::size_t i = 0; i < volumes_.size(); ++i) {
    if (!(volumes_[i] > 0.0) || !std::isfinite(volumes_[i])) {
      throw GeometryError("voxel " + std::to_string(i) + " has non-positive volume");
    }
  }
  const auto k = static_cast<std::uint32_t>(volumes_.size());
  for (auto& e : edges_) {
    if (e.a == e.b) throw GeometryError("self-loop edge on voxel " + std::to_string(e.a));
    if (e.a >= k || e.b >= k) throw GeometryError("edge references voxel out of range");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (!(e.interface_area > 0.0) || !(e.distance > 0.0) || !std::isfinite(e.interface_area) ||
        !std::isfinite(e.distance)) {
      throw GeometryError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                          ") needs positive interface area and distance");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const MeshEdge& l, const MeshEdge& r) {
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw GeometryError("duplicate edge (" + std::to_string(edges_[i].a) + "," + std::to_string(edges_[i].b) + ")");
    }
  }

  row_ptr_.assign(k + 1, 0);
  for (const auto& e : edges_) {
    ++row_ptr_[e.a + 1];
    ++row_ptr_[e.b + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  adjacency_.resize(2 * edges_.size());
  std::vector<std::uint32_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  for (std::uint32_t idx = 0; idx < edges_.size(); ++idx) {
    const auto& e = edges_[idx];
    adjacency_[fill[e.a]++] = {e.b, idx};
    adjacency_[fill[e.b]++] = {e.a, idx};
  }
  for (std::uint32_t v = 0; v < k; ++v) {
    std::sort(adjacency_.begin() + row_ptr_[v], adjacency_.begin() + row_ptr_[v + 1],
              [](const Neighbor& l, const Neighbor& r) { return l.voxel < r.voxel; });
  }
}

double Mesh::total_volume() const noexcept { return std::accumulate(volumes_.begin(), volumes_.end(), 0.0); }

bool Mesh::adjacent(std::size_t i, std::size_t j) const noexcept {
  auto n = neighbors(i);
  return std::binary_search(n.begin(), n.end(), Neighbor{static_cast<std::uint32_t>(j), 0},
                            [](const Neighbor& l, const Neighbor& r) { return l.voxel < r.voxel; });
}

SubdomainMap SubdomainMap::uniform(std::size_t num_voxels, int label) {
  return SubdomainMap{std::vector<int>(num_voxels, label), {label}};
}

std::vector<std::uint32_t> SubdomainMap::members(int label) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

Mesh build_cartesian_grid(int dim, std::span<const double> lengths, std::span<const int> n_per_axis) {
  if (dim < 1 || dim > 3) throw GeometryError("grid dimension must be 1, 2 or 3");
  if (lengths.size() != static_cast<std::size_t>(dim) || n_per_axis.size() != static_cast<std::size_t>(dim)) {
    throw GeometryError("grid needs one length and one count per axis");
  }
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  // Per-axis dual extent of each vertex: h interior, h/2 at the ends, L when n == 1.
  std::array<std::vector<double>, 3> extent;
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) throw GeometryError("grid length must be positive");
      if (n_per_axis[a] < 1) throw GeometryError("grid count must be at least 1");
      n[a] = n_per_axis[a];
      h[a] = n[a] > 1 ? lengths[a] / (n[a] - 1) : lengths[a];
      extent[a].assign(n[a], h[a]);
      if (n[a] > 1) {
        extent[a].front() = 0.5 * h[a];
        extent[a].back() = 0.5 * h[a];
      }
    } else {
      extent[a].assign(1, 1.0);
    }
  }
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  if (total > std::numeric_limits<std::uint32_t>::max()) throw GeometryError("grid too large");

  auto id = [&](int i, int j, int k) { return static_cast<std::uint32_t>(i + n[0] * (j + n[1] * k)); };
  std::vector<Vec3> coords(total);
  std::vector<double> volumes(total);
  std::vector<MeshEdge> edges;
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const auto v = id(i, j, k);
        coords[v] = {dim > 0 && n[0] > 1 ? i * h[0] : 0.0, dim > 1 && n[1] > 1 ? j * h[1] : 0.0,
                     dim > 2 && n[2] > 1 ? k * h[2] : 0.0};
        volumes[v] = extent[0][i] * extent[1][j] * extent[2][k];
        const std::array<int, 3> idx{i, j, k};
        for (int a = 0; a < dim; ++a) {
          if (idx[a] + 1 >= n[a]) continue;
          auto nb = idx;
          ++nb[a];
          double area = 1.0;
          for (int b = 0; b < dim; ++b) {
            if (b != a) area *= extent[b][idx[b]];
          }
          edges.push_back({v, id(nb[0], nb[1], nb[2]), area, h[a]});
        }
      }
    }
  }
  return Mesh(dim, std::move(coords), std::move(volumes), std::move(edges));
}

namespace {

[[noreturn]] void parse_fail(const std::string& msg, std::size_t line) {
  throw ParseError("mesh line " + std::to_string(line) + ": " + msg, line, 0);
}

}  // namespace

LabeledMesh parse_mesh(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  int dim = 0;
  std::size_t k = 0;
  std::size_t e = 0;
  std::vector<Vec3> coords;
  std::vector<double> volumes;
  std::vector<int> labels;
  std::vector<bool> seen;
  std::map<std::pair<std::uint32_t, std::uint32_t>, MeshEdge> edges;
  std::size_t edge_lines = 0;
  std::size_t vertex_lines = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;

    if (!have_header) {
      std::string version;
      if (tag != "RFMESH" || !(ls >> version >> dim >> k >> e) || version != "1") {
        parse_fail("expected header 'RFMESH 1 <dim> <K> <E>'", line_no);
      }
      if (dim < 1 || dim > 3) parse_fail("dimension must be 1, 2 or 3", line_no);
      coords.resize(k);
      volumes.resize(k);
      labels.assign(k, kCytosolLabel);
      seen.assign(k, false);
      have_header = true;
      continue;
    }

    if (tag == "v") {
      std::size_t id = 0;
      std::vector<double> nums;
      if (!(ls >> id)) parse_fail("vertex id expected", line_no);
      std::string tok;
      std::vector<std::string> rest;
      while (ls >> tok) rest.push_back(tok);
      // dim coordinates, volume, then an optional label
      if (rest.size() != static_cast<std::size_t>(dim) + 1 && rest.size() != static_cast<std::size_t>(dim) + 2) {
        parse_fail("vertex needs " + std::to_string(dim) + " coordinates, a volume and an optional label", line_no);
      }
      if (id >= k) parse_fail("vertex id " + std::to_string(id) + " out of range", line_no);
      if (seen[id]) parse_fail("vertex id " + std::to_string(id) + " repeated", line_no);
      try {
        for (std::size_t c = 0; c < static_cast<std::size_t>(dim) + 1; ++c) {
          std::size_t used = 0;
          nums.push_back(std::stod(rest[c], &used));
          if (used != rest[c].size()) throw std::invalid_argument(rest[c]);
        }
        if (rest.size() == static_cast<std::size_t>(dim) + 2) {
          std::size_t used = 0;
          labels[id] = std::stoi(rest.back(), &used);
          if (used != rest.back().size()) throw std::invalid_argument(rest.back());
        }
      } catch (const std::logic_error&) {
        parse_fail("malformed number", line_no);
      }
      coords[id] = {nums[0], dim > 1 ? nums[1] : 0.0, dim > 2 ? nums[2] : 0.0};
      volumes[id] = nums[static_cast<std::size_t>(dim)];
      if (!(volumes[id] > 0.0)) throw GeometryError("voxel " + std::to_string(id) + " has non-positive volume");
      seen[id] = true;
      ++vertex_lines;
    } else if (tag == "e") {
      long long i = -1;
      long long j = -1;
      double area = 0.0;
      double dist = 0.0;
      std::string extra;
      if (!(ls >> i >> j >> area >> dist) || (ls >> extra)) {
        parse_fail("edge needs '<i> <j> <interface_area> <distance>'", line_no);
      }
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= k || static_cast<std::size_t>(j) >= k) {
        parse_fail("edge references voxel out of range", line_no);
      }
      if (i == j) throw GeometryError("self-loop edge on voxel " + std::to_string(i));
      const auto a = static_cast<std::uint32_t>(std::min(i, j));
      const auto b = static_cast<std::uint32_t>(std::max(i, j));
      MeshEdge edge{a, b, area, dist};
      auto [it, inserted] = edges.emplace(std::make_pair(a, b), edge);
      if (!inserted && (it->second.interface_area != area || it->second.distance != dist)) {
        throw GeometryError("asymmetric adjacency: edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") listed twice with different geometry");
      }
      ++edge_lines;
    } else {
      parse_fail("unknown record '" + tag + "'", line_no);
    }
  }
  if (!have_header) parse_fail("missing RFMESH header", line_no);
  if (vertex_lines != k) parse_fail("expected " + std::to_string(k) + " vertices, found " + std::to_string(vertex_lines), line_no);
  if (edge_lines != e) parse_fail("expected " + std::to_string(e) + " edges, found " + std::to_string(edge_lines), line_no);

  std::vector<MeshEdge> edge_list;
  edge_list.reserve(edges.size());
  for (auto& [key, edge] : edges) edge_list.push_back(edge);
  Mesh mesh(dim, std::move(coords), std::move(volumes), std::move(edge_list));
  SubdomainMap sub{labels, std::set<int>(labels.begin(), labels.end())};
  return {std::move(mesh), std::move(sub)};
}

LabeledMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  return parse_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh, const SubdomainMap& subdomains) {
  const auto old_prec = out.precision(17);
  out << "RFMESH 1 " << mesh.dim() << ' ' << mesh.num_voxels() << ' ' << mesh.num_edges() << '\n';
  for (std::size_t i = 0; i < mesh.num_voxels(); ++i) {
    const auto& c = mesh.coords()[i];
    out << "v " << i << ' ' << c.x;
    if (mesh.dim() > 1) out << ' ' << c.y;
    if (mesh.dim() > 2) out << ' ' << c.z;
    out << ' ' << mesh.volumes()[i] << ' ' << subdomains.labels.at(i) << '\n';
  }
  for (const auto& e : mesh.edges()) {
    out << "e " << e.a << ' ' << e.b << ' ' << e.interface_area << ' ' << e.distance << '\n';
  }
  out.precision(old_prec);
}

}  // namespace rdfleet
