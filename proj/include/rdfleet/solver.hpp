#pragma once

#include <cstdint>

#include "rdfleet/model.hpp"
#include "rdfleet/trajectory.hpp"

namespace rdfleet {

/// How the NSM updates the diffusion destination's next-event time.
enum class Reschedule {
  Rescale,  ///< keep the remaining waiting time, scaled by old/new total rate
  Redraw,   ///< draw a fresh exponential
};

struct SolverOptions {
  Reschedule reschedule = Reschedule::Rescale;
  std::uint64_t max_events = 100'000'000'000ULL;
  std::uint64_t resync_interval = 10'000;
  /// Throw std::logic_error when a resync finds drift above 1e-9 relative.
  bool check_bookkeeping = false;
};

/// Random streams under a realization seed: scatter placement and event sampling
/// never share random numbers.
inline constexpr std::uint64_t kInitialStream = 0;
inline constexpr std::uint64_t kSolverStream = 1;

/// Next Subvolume Method. The initial state is resolved from the model's
/// directives using `seed`; identical (model, seed) give identical trajectories.
Trajectory run_nsm(const CompiledModel& model, std::uint64_t seed, const SolverOptions& options = {});
Trajectory run_nsm(const CompiledModel& model, const StateMatrix& initial, std::uint64_t seed,
                   const SolverOptions& options = {});

/// Gillespie direct method over every reaction and diffusion channel of every voxel.
/// Linear-time per event; meant as an independent reference for small systems.
Trajectory run_direct_ssa(const CompiledModel& model, std::uint64_t seed, const SolverOptions& options = {});
Trajectory run_direct_ssa(const CompiledModel& model, const StateMatrix& initial, std::uint64_t seed,
                          const SolverOptions& options = {});

}  // namespace rdfleet
