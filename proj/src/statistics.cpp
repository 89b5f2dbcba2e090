#include "rdfleet/statistics.hpp"

#include <cmath>

#include "rdfleet/error.hpp"

namespace rdfleet {

void Partial::add(std::span<const double> g) {
  if (g.size() != arity()) {
    throw PostProcessorError("post-processor returned " + std::to_string(g.size()) + " values, expected " +
                             std::to_string(arity()));
  }
  ++count;
  const double n = static_cast<double>(count);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double delta = g[c] - mean[c];
    mean[c] += delta / n;
    m2[c] += delta * (g[c] - mean[c]);
  }
}

void Partial::merge(const Partial& other) {
  if (other.count == 0) return;
  if (other.arity() != arity()) throw PostProcessorError("cannot merge partials of different arity");
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  for (std::size_t c = 0; c < arity(); ++c) {
    const double delta = other.mean[c] - mean[c];
    mean[c] += delta * (nb / n);
    m2[c] += other.m2[c] + delta * delta * (na * nb / n);
  }
  count += other.count;
}

StatSummary summarize(const Partial& partial, std::string postprocessor) {
  if (partial.count < 2) {
    throw VarianceUndefined("variance needs at least two realizations, got " + std::to_string(partial.count));
  }
  StatSummary s;
  s.postprocessor = std::move(postprocessor);
  s.count = partial.count;
  s.mean = partial.mean;
  s.variance.resize(partial.arity());
  s.ci95.resize(partial.arity());
  const double k = static_cast<double>(partial.count);
  for (std::size_t c = 0; c < partial.arity(); ++c) {
    s.variance[c] = std::max(0.0, partial.m2[c]) / (k - 1.0);
    s.ci95[c] = kZ95 * std::sqrt(s.variance[c] / k);
  }
  return s;
}

StatSummary summarize(const std::vector<std::vector<double>>& outputs, std::string postprocessor) {
  Partial p(outputs.empty() ? 0 : outputs.front().size());
  for (const auto& g : outputs) p.add(g);
  return summarize(p, std::move(postprocessor));
}

}  // namespace rdfleet
