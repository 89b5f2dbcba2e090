#include <chrono>
#include <limits>

#include "rdfleet/solver.hpp"
#include "solver_common.hpp"

namespace rdfleet {

Trajectory run_direct_ssa(const CompiledModel& model, const StateMatrix& initial, std::uint64_t seed,
                          const SolverOptions& options) {
  if (initial.num_voxels != model.num_voxels() || initial.num_species != model.num_species()) {
    throw ModelError("initial state shape does not match the model");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = model.num_voxels();
  const std::size_t s = model.num_species();
  const auto& volumes = model.spec->mesh->volumes();
  std::vector<std::int64_t> x = initial.counts;
  auto voxel = [&](std::size_t i) { return std::span<std::int64_t>(x.data() + i * s, s); };

  Trajectory traj(model.spec->tspan, k, s);
  traj.model_hash = model.model_hash;
  traj.seed = seed;
  traj.info.solver = "direct";
  RandomStream rng(seed, kSolverStream);

  // Per-voxel totals are recomputed from scratch for every touched voxel, so there
  // is no incremental state to drift; the global sum is rebuilt every step.
  double t = 0.0;
  std::vector<double> a(k), d(k);
  for (std::size_t i = 0; i < k; ++i) {
    a[i] = detail::voxel_reaction_rate(model, voxel(i), volumes[i], i, t);
    d[i] = detail::voxel_diffusion_rate(model, voxel(i), i);
  }

  std::size_t out = 0;
  std::uint64_t events = 0;
  const auto& tspan = traj.tspan;
  auto record = [&] {
    std::copy(x.begin(), x.end(), traj.counts.begin() + static_cast<std::ptrdiff_t>(out * k * s));
    ++out;
  };
  while (out < tspan.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += a[i] + d[i];
    const double t_next = total > 0.0 ? t + rng.exponential(total) : std::numeric_limits<double>::infinity();
    while (out < tspan.size() && t_next > tspan[out]) record();
    if (out == tspan.size()) break;
    if (++events > options.max_events) {
      throw BudgetExceeded("event budget of " + std::to_string(options.max_events) + " exhausted");
    }
    t = t_next;

    // Flattened channel order: voxel by voxel, reactions first, then jumps.
    double r = rng.uniform() * total;
    std::size_t i = 0;
    for (; i + 1 < k; ++i) {
      if (r < a[i] + d[i]) break;
      r -= a[i] + d[i];
    }
    while (a[i] + d[i] <= 0.0) --i;  // floating-point shortfall past the last live voxel
    auto xi = voxel(i);
    if (r < a[i]) {
      const auto& reaction = model.reactions[detail::pick_reaction(model, xi, volumes[i], i, r, t)];
      for (const auto& [sp, delta] : reaction.change) {
        xi[sp] += delta;
        if (xi[sp] < 0) {
          throw ModelRuntimeError("reaction '" + reaction.name + "' drove a count negative in voxel " +
                                      std::to_string(i),
                                  i, reaction.name, t);
        }
      }
      ++traj.info.reaction_events;
    } else {
      const auto jump = detail::pick_jump(model, xi, i, std::min(r - a[i], d[i]), rng);
      const auto [sp, j] = *jump;
      --xi[sp];
      ++x[j * s + sp];
      a[j] = detail::voxel_reaction_rate(model, voxel(j), volumes[j], j, t);
      d[j] = detail::voxel_diffusion_rate(model, voxel(j), j);
      ++traj.info.diffusion_events;
    }
    a[i] = detail::voxel_reaction_rate(model, xi, volumes[i], i, t);
    d[i] = detail::voxel_diffusion_rate(model, xi, i);
  }
  traj.info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

Trajectory run_direct_ssa(const CompiledModel& model, std::uint64_t seed, const SolverOptions& options) {
  RandomStream init(seed, kInitialStream);
  return run_direct_ssa(model, resolve_initial_state(*model.spec, init), seed, options);
}

}  // namespace rdfleet
