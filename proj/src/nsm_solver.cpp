#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rdfleet/indexed_heap.hpp"
#include "rdfleet/solver.hpp"
#include "solver_common.hpp"

namespace rdfleet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class NsmRun {
 public:
  NsmRun(const CompiledModel& model, const StateMatrix& initial, std::uint64_t seed, const SolverOptions& options)
      : m_(model),
        opt_(options),
        rng_(seed, kSolverStream),
        k_(model.num_voxels()),
        s_(model.num_species()),
        volumes_(model.spec->mesh->volumes()),
        x_(initial.counts),
        a_(k_, 0.0),
        d_(k_, 0.0) {
    traj_ = Trajectory(model.spec->tspan, k_, s_);
    traj_.model_hash = model.model_hash;
    traj_.seed = seed;
    traj_.info.solver = "nsm";
  }

  Trajectory run() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> times(k_, kInf);
    for (std::size_t i = 0; i < k_; ++i) {
      a_[i] = detail::voxel_reaction_rate(m_, voxel(i), volumes_[i], i, t_);
      d_[i] = detail::voxel_diffusion_rate(m_, voxel(i), i);
      times[i] = draw(i);
    }
    heap_ = IndexedMinHeap(std::move(times));

    const auto& tspan = traj_.tspan;
    std::size_t out = 0;
    std::uint64_t events = 0;
    while (out < tspan.size()) {
      const double t_next = k_ == 0 ? kInf : heap_.top_key();
      while (out < tspan.size() && t_next > tspan[out]) record(out++);
      if (out == tspan.size()) break;
      if (++events > opt_.max_events) {
        throw BudgetExceeded("event budget of " + std::to_string(opt_.max_events) + " exhausted at t=" +
                             std::to_string(t_));
      }
      t_ = t_next;
      step(heap_.top());
      if (events % opt_.resync_interval == 0) resync();
    }
    resync();
    traj_.info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(traj_);
  }

 private:
  std::span<std::int64_t> voxel(std::size_t i) { return {x_.data() + i * s_, s_}; }

  double draw(std::size_t i) {
    const double total = a_[i] + d_[i];
    return total > 0.0 ? t_ + rng_.exponential(total) : kInf;
  }

  void record(std::size_t out) {
    std::copy(x_.begin(), x_.end(), traj_.counts.begin() + static_cast<std::ptrdiff_t>(out * k_ * s_));
  }

  void step(std::size_t i) {
    const double total = a_[i] + d_[i];
    const double r = rng_.uniform() * total;
    auto xi = voxel(i);
    if (r < a_[i]) {
      const auto& reaction = m_.reactions[detail::pick_reaction(m_, xi, volumes_[i], i, r, t_)];
      for (const auto& [s, delta] : reaction.change) {
        xi[s] += delta;
        if (xi[s] < 0) {
          throw ModelRuntimeError("reaction '" + reaction.name + "' drove a count negative in voxel " +
                                      std::to_string(i),
                                  i, reaction.name, t_);
        }
        d_[i] += static_cast<double>(delta) * m_.diffusion.exit_rate(s, i);
      }
      d_[i] = std::max(0.0, d_[i]);
      a_[i] = detail::voxel_reaction_rate(m_, xi, volumes_[i], i, t_);
      ++traj_.info.reaction_events;
      heap_.update(i, draw(i));
      return;
    }

    const auto jump = detail::pick_jump(m_, xi, i, r - a_[i], rng_);
    if (!jump) {
      d_[i] = detail::voxel_diffusion_rate(m_, xi, i);
      heap_.update(i, draw(i));
      return;
    }
    const auto [s, j] = *jump;
    --xi[s];
    assert(xi[s] >= 0);
    auto xj = voxel(j);
    ++xj[s];
    const double exit_i = m_.diffusion.exit_rate(s, i);
    d_[i] = std::max(0.0, d_[i] - exit_i);
    a_[i] = detail::voxel_reaction_rate(m_, xi, volumes_[i], i, t_);
    ++traj_.info.diffusion_events;
    heap_.update(i, draw(i));

    const double old_total = a_[j] + d_[j];
    d_[j] += m_.diffusion.exit_rate(s, j);
    a_[j] = detail::voxel_reaction_rate(m_, xj, volumes_[j], j, t_);
    const double new_total = a_[j] + d_[j];
    double tj = kInf;
    if (new_total > 0.0) {
      const double old_time = heap_.key(j);
      if (opt_.reschedule == Reschedule::Rescale && old_total > 0.0 && std::isfinite(old_time)) {
        tj = t_ + (old_time - t_) * (old_total / new_total);
      } else {
        tj = t_ + rng_.exponential(new_total);
      }
    }
    heap_.update(j, tj);
  }

  // Recompute a_i and d_i from scratch. Reaction totals are already recomputed per
  // event, so only diffusion totals can drift. Drift is measured relative to the
  // larger of the rates and the one-molecule exit rate, so an emptied voxel holding
  // a rounding residue does not count as total drift.
  void resync() {
    for (std::size_t i = 0; i < k_; ++i) {
      const auto xi = voxel(i);
      const double a = detail::voxel_reaction_rate(m_, xi, volumes_[i], i, t_);
      const double d = detail::voxel_diffusion_rate(m_, xi, i);
      double unit = 0.0;
      for (std::size_t s = 0; s < s_; ++s) unit += m_.diffusion.exit_rate(s, i);
      const double scale = std::max({std::abs(a) + std::abs(d), std::abs(a_[i]) + std::abs(d_[i]), unit, 1e-300});
      const double drift = (std::abs(a - a_[i]) + std::abs(d - d_[i])) / scale;
      traj_.info.max_resync_drift = std::max(traj_.info.max_resync_drift, drift);
      if (opt_.check_bookkeeping && drift > 1e-9) {
        throw std::logic_error("propensity drift " + std::to_string(drift) + " in voxel " + std::to_string(i));
      }
      a_[i] = a;
      d_[i] = d;
    }
  }

  const CompiledModel& m_;
  SolverOptions opt_;
  RandomStream rng_;
  std::size_t k_;
  std::size_t s_;
  const std::vector<double>& volumes_;
  std::vector<std::int64_t> x_;
  std::vector<double> a_;
  std::vector<double> d_;
  IndexedMinHeap heap_;
  double t_ = 0.0;
  Trajectory traj_;
};

}  // namespace

Trajectory run_nsm(const CompiledModel& model, const StateMatrix& initial, std::uint64_t seed,
                   const SolverOptions& options) {
  if (initial.num_voxels != model.num_voxels() || initial.num_species != model.num_species()) {
    throw ModelError("initial state shape does not match the model");
  }
  return NsmRun(model, initial, seed, options).run();
}

Trajectory run_nsm(const CompiledModel& model, std::uint64_t seed, const SolverOptions& options) {
  RandomStream init(seed, kInitialStream);
  return run_nsm(model, resolve_initial_state(*model.spec, init), seed, options);
}

}  // namespace rdfleet
