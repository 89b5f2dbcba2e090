#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdfleet/mesh.hpp"
#include "rdfleet/species.hpp"

namespace rdfleet {

/// Per-species voxel-to-voxel jump rates, stored as one CSR block per species.
///
/// Rates follow the finite-volume formula d(i->j) = D * A_ij / (h_ij * V_i).
/// `exit_rate(s, i)` is the left-to-right sum of the row in CSR order, which is the
/// same order the solvers scan when picking a destination.
class DiffusionMatrix {
 public:
  struct Jump {
    std::uint32_t dest;
    double rate;
  };

  DiffusionMatrix() = default;
  DiffusionMatrix(std::size_t num_voxels, std::size_t num_species);

  std::size_t num_voxels() const noexcept { return num_voxels_; }
  std::size_t num_species() const noexcept { return blocks_.size(); }

  std::span<const Jump> row(std::size_t species, std::size_t voxel) const noexcept {
    const auto& b = blocks_[species];
    return {b.jumps.data() + b.row_ptr[voxel], b.jumps.data() + b.row_ptr[voxel + 1]};
  }
  double exit_rate(std::size_t species, std::size_t voxel) const noexcept { return blocks_[species].exit[voxel]; }
  double rate(std::size_t species, std::size_t from, std::size_t to) const noexcept;
  std::size_t nonzeros(std::size_t species) const noexcept { return blocks_[species].jumps.size(); }

 private:
  friend DiffusionMatrix assemble_diffusion(const Mesh&, const SubdomainMap&, std::span<const Species>);

  struct Block {
    std::vector<std::uint32_t> row_ptr;
    std::vector<Jump> jumps;
    std::vector<double> exit;
  };
  std::size_t num_voxels_ = 0;
  std::vector<Block> blocks_;
};

/// Assemble jump rates for every species. Rates touching a voxel whose label the
/// species may not occupy are omitted. Throws ModelError for negative or non-finite
/// diffusion constants and for labels the subdomain map does not declare.
DiffusionMatrix assemble_diffusion(const Mesh& mesh, const SubdomainMap& subdomains, std::span<const Species> species);

}  // namespace rdfleet
