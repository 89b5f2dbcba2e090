#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rdfleet {

/// Running count, mean and sum of squared deviations per component (Welford), with
/// Chan's pairwise merge. Partials from any split of the data merge to the same
/// summary up to rounding; the engine merges in realization-index order so results
/// are bit-identical regardless of how work was distributed.
struct Partial {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Partial(std::size_t arity = 0) : mean(arity, 0.0), m2(arity, 0.0) {}

  std::size_t arity() const noexcept { return mean.size(); }
  void add(std::span<const double> g);
  void merge(const Partial& other);
};

/// E[g], unbiased V[g] (K-1 denominator) and 95% CI half-width 1.96 sqrt(V/K).
struct StatSummary {
  std::string postprocessor;
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> ci95;

  bool operator==(const StatSummary&) const = default;
};

inline constexpr double kZ95 = 1.96;

/// Throws VarianceUndefined when fewer than two samples were added.
StatSummary summarize(const Partial& partial, std::string postprocessor = {});

/// Summary of per-realization outputs, accumulated in the given order.
StatSummary summarize(const std::vector<std::vector<double>>& outputs, std::string postprocessor = {});

}  // namespace rdfleet
