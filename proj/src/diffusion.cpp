#include "rdfleet/diffusion.hpp"

#include <cmath>

#include "rdfleet/error.hpp"

namespace rdfleet {

DiffusionMatrix::DiffusionMatrix(std::size_t num_voxels, std::size_t num_species)
    : num_voxels_(num_voxels), blocks_(num_species) {
  for (auto& b : blocks_) {
    b.row_ptr.assign(num_voxels + 1, 0);
    b.exit.assign(num_voxels, 0.0);
  }
}

double DiffusionMatrix::rate(std::size_t species, std::size_t from, std::size_t to) const noexcept {
  for (const auto& j : row(species, from)) {
    if (j.dest == to) return j.rate;
  }
  return 0.0;
}

DiffusionMatrix assemble_diffusion(const Mesh& mesh, const SubdomainMap& subdomains, std::span<const Species> species) {
  const std::size_t k = mesh.num_voxels();
  if (subdomains.labels.size() != k) throw ModelError("subdomain map size does not match mesh");
  DiffusionMatrix dm(k, species.size());
  for (std::size_t s = 0; s < species.size(); ++s) {
    const Species& sp = species[s];
    if (!(sp.diffusion_constant >= 0.0) || !std::isfinite(sp.diffusion_constant)) {
      throw ModelError("species '" + sp.name + "' has a negative or non-finite diffusion constant");
    }
    for (int label : sp.allowed_subdomains) {
      if (!subdomains.has(label)) {
        throw ModelError("species '" + sp.name + "' references undeclared subdomain " + std::to_string(label));
      }
    }
    auto& block = dm.blocks_[s];
    for (std::size_t i = 0; i < k; ++i) {
      block.row_ptr[i] = static_cast<std::uint32_t>(block.jumps.size());
      if (sp.diffusion_constant > 0.0 && sp.allowed_in(subdomains.labels[i])) {
        double exit = 0.0;
        for (const auto& nb : mesh.neighbors(i)) {
          if (!sp.allowed_in(subdomains.labels[nb.voxel])) continue;
          const MeshEdge& e = mesh.edges()[nb.edge];
          const double r = sp.diffusion_constant * e.interface_area / (e.distance * mesh.volumes()[i]);
          block.jumps.push_back({nb.voxel, r});
          exit += r;
        }
        block.exit[i] = exit;
      }
    }
    block.row_ptr[k] = static_cast<std::uint32_t>(block.jumps.size());
  }
  return dm;
}

}  // namespace rdfleet
