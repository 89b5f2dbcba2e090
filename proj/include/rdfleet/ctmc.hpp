#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rdfleet/model.hpp"

namespace rdfleet {

/// Generator of the RDME jump process restricted to a capped state space.
///
/// States are all K x S count matrices with each entry in [0, cap[species]],
/// enumerated in mixed-radix order (entry 0 of the flattened matrix varies fastest).
/// Transitions that would leave the capped space are dropped, so every row of Q
/// still sums to zero.
struct CtmcGenerator {
  std::size_t num_voxels = 0;
  std::size_t num_species = 0;
  std::vector<std::int64_t> caps;  ///< per species
  std::size_t num_states = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;

  /// Flattened K x S counts of state `index`.
  std::vector<std::int64_t> state(std::size_t index) const;
  /// Index of a flattened state, or num_states when it lies outside the caps.
  std::size_t index_of(std::span<const std::int64_t> counts) const;
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(q); }
};

inline constexpr std::size_t kMaxCtmcStates = 200'000;

/// Enumerate states and assemble Q. Throws CapacityError above `max_states`.
CtmcGenerator build_ctmc_generator(const CompiledModel& model, std::span<const std::int64_t> state_cap,
                                   std::size_t max_states = kMaxCtmcStates);

/// p(t) = p0 exp(Q t) by uniformization; truncation error below `tolerance` in L1.
Eigen::VectorXd transient_distribution(const CtmcGenerator& gen, const Eigen::VectorXd& p0, double t,
                                       double tolerance = 1e-12);

}  // namespace rdfleet
