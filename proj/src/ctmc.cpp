#include "rdfleet/ctmc.hpp"

#include <cmath>

#include "rdfleet/error.hpp"

namespace rdfleet {

std::vector<std::int64_t> CtmcGenerator::state(std::size_t index) const {
  std::vector<std::int64_t> x(num_voxels * num_species);
  for (std::size_t e = 0; e < x.size(); ++e) {
    const auto radix = static_cast<std::size_t>(caps[e % num_species] + 1);
    x[e] = static_cast<std::int64_t>(index % radix);
    index /= radix;
  }
  return x;
}

std::size_t CtmcGenerator::index_of(std::span<const std::int64_t> counts) const {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    const auto cap = caps[e % num_species];
    if (counts[e] < 0 || counts[e] > cap) return num_states;
    index += static_cast<std::size_t>(counts[e]) * stride;
    stride *= static_cast<std::size_t>(cap + 1);
  }
  return index;
}

CtmcGenerator build_ctmc_generator(const CompiledModel& model, std::span<const std::int64_t> state_cap,
                                   std::size_t max_states) {
  const std::size_t k = model.num_voxels();
  const std::size_t s = model.num_species();
  if (state_cap.size() != s) throw ModelError("state cap needs one entry per species");
  CtmcGenerator gen;
  gen.num_voxels = k;
  gen.num_species = s;
  gen.caps.assign(state_cap.begin(), state_cap.end());
  std::size_t n = 1;
  for (std::size_t e = 0; e < k * s; ++e) {
    const auto cap = gen.caps[e % s];
    if (cap < 0) throw ModelError("state cap must be nonnegative");
    const auto radix = static_cast<std::size_t>(cap) + 1;
    if (n > max_states / radix) {
      throw CapacityError("capped state space exceeds " + std::to_string(max_states) + " states");
    }
    n *= radix;
  }
  gen.num_states = n;

  const auto& volumes = model.spec->mesh->volumes();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::int64_t> y;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto x = gen.state(idx);
    double out_rate = 0.0;
    auto add = [&](double rate) {
      const std::size_t to = gen.index_of(y);
      if (rate <= 0.0 || to == n) return;
      triplets.emplace_back(static_cast<int>(idx), static_cast<int>(to), rate);
      out_rate += rate;
    };
    for (std::size_t i = 0; i < k; ++i) {
      std::span<const std::int64_t> xi(x.data() + i * s, s);
      for (auto r : model.voxel_reactions[i]) {
        const auto& reaction = model.reactions[r];
        const double a = reaction.propensity(xi, volumes[i]);
        if (!(a >= 0.0)) throw ModelError("negative propensity while building generator");
        y = x;
        for (const auto& [sp, delta] : reaction.change) y[i * s + sp] += delta;
        add(a);
      }
      for (std::size_t sp = 0; sp < s; ++sp) {
        if (x[i * s + sp] == 0) continue;
        for (const auto& jump : model.diffusion.row(sp, i)) {
          y = x;
          --y[i * s + sp];
          ++y[jump.dest * s + sp];
          add(jump.rate * static_cast<double>(x[i * s + sp]));
        }
      }
    }
    if (out_rate > 0.0) triplets.emplace_back(static_cast<int>(idx), static_cast<int>(idx), -out_rate);
  }
  gen.q.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  gen.q.setFromTriplets(triplets.begin(), triplets.end());
  gen.q.makeCompressed();
  return gen;
}

Eigen::VectorXd transient_distribution(const CtmcGenerator& gen, const Eigen::VectorXd& p0, double t,
                                       double tolerance) {
  if (t <= 0.0) return p0;
  const double lambda = (-gen.q.diagonal()).maxCoeff();
  if (lambda <= 0.0) return p0;
  // p(t) = sum_n Poisson(n; lambda t) p0 P^n with P = I + Q / lambda.
  const Eigen::SparseMatrix<double> pt = Eigen::SparseMatrix<double>(gen.q.transpose()) / lambda;
  const double mu = lambda * t;
  Eigen::VectorXd v = p0;
  Eigen::VectorXd result = Eigen::VectorXd::Zero(p0.size());
  // Poisson weights in log space so large lambda*t does not underflow the first terms.
  double accumulated = 0.0;
  for (std::size_t n = 0;; ++n) {
    const double w = std::exp(-mu + static_cast<double>(n) * std::log(mu) - std::lgamma(static_cast<double>(n) + 1.0));
    result += w * v;
    accumulated += w;
    if (static_cast<double>(n) > mu && 1.0 - accumulated < tolerance) break;
    if (n > static_cast<std::size_t>(mu + 40.0 * std::sqrt(mu) + 1000.0)) break;
    v = v + pt * v;
  }
  return result;
}

}  // namespace rdfleet
