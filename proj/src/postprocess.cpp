#include "rdfleet/postprocess.hpp"

#include <charconv>
#include <memory>

#include "rdfleet/polarization.hpp"

namespace rdfleet {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& spec, const std::string& why) {
  throw PostProcessorError("post-processor '" + spec + "': " + why);
}

std::size_t species_arg(const std::string& spec, const ModelSpec& model, const std::string& name) {
  const auto s = model.species_index(name);
  if (!s) bad(spec, "unknown species '" + name + "'");
  return *s;
}

// Voxels to sum over; empty optional means the whole domain.
std::shared_ptr<const std::vector<std::uint32_t>> scope_arg(const std::string& spec, const ModelSpec& model,
                                                            const std::vector<std::string>& parts, std::size_t at) {
  if (parts.size() <= at) return nullptr;
  int label = 0;
  const auto& text = parts[at];
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), label);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad(spec, "label must be an integer");
  if (!model.subdomains || !model.subdomains->has(label)) bad(spec, "undeclared subdomain " + text);
  return std::make_shared<const std::vector<std::uint32_t>>(model.subdomains->members(label));
}

double count(const Trajectory& traj, std::size_t t, std::size_t species,
             const std::shared_ptr<const std::vector<std::uint32_t>>& voxels) {
  std::int64_t sum = 0;
  if (voxels) {
    for (auto v : *voxels) sum += traj.at(t, v, species);
  } else {
    for (std::size_t v = 0; v < traj.num_voxels; ++v) sum += traj.at(t, v, species);
  }
  return static_cast<double>(sum);
}

}  // namespace

std::vector<double> PostProcessor::operator()(const Trajectory& traj) const {
  auto g = fn(traj);
  if (g.size() != arity) {
    throw PostProcessorError("post-processor '" + spec + "' returned " + std::to_string(g.size()) +
                             " values, declared " + std::to_string(arity));
  }
  return g;
}

std::vector<std::string> registered_postprocessors() {
  return {"final_count", "count_at", "timeseries_total", "constant", "polarization_stats"};
}

PostProcessor make_postprocessor(const std::string& spec, const ModelSpec& model) {
  const auto parts = split(spec, ':');
  const auto& name = parts[0];
  const std::size_t t_count = model.tspan.size();
  PostProcessor p;
  p.spec = spec;

  if (name == "final_count") {
    if (parts.size() < 2 || parts.size() > 3) bad(spec, "expected final_count:<species>[:<label>]");
    const auto s = species_arg(spec, model, parts[1]);
    const auto voxels = scope_arg(spec, model, parts, 2);
    p.arity = 1;
    p.fn = [s, voxels](const Trajectory& traj) {
      if (traj.num_times() == 0) return std::vector<double>{};
      return std::vector<double>{count(traj, traj.num_times() - 1, s, voxels)};
    };
  } else if (name == "count_at") {
    if (parts.size() < 3 || parts.size() > 4) bad(spec, "expected count_at:<species>:<t_index>[:<label>]");
    const auto s = species_arg(spec, model, parts[1]);
    std::size_t t = 0;
    auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), t);
    if (ec != std::errc() || ptr != parts[2].data() + parts[2].size() || t >= t_count) {
      bad(spec, "time index must be below " + std::to_string(t_count));
    }
    const auto voxels = scope_arg(spec, model, parts, 3);
    p.arity = 1;
    p.fn = [s, t, voxels](const Trajectory& traj) {
      if (t >= traj.num_times()) return std::vector<double>{};
      return std::vector<double>{count(traj, t, s, voxels)};
    };
  } else if (name == "timeseries_total") {
    if (parts.size() < 2 || parts.size() > 3) bad(spec, "expected timeseries_total:<species>[:<label>]");
    const auto s = species_arg(spec, model, parts[1]);
    const auto voxels = scope_arg(spec, model, parts, 2);
    p.arity = t_count;
    p.fn = [s, voxels](const Trajectory& traj) {
      std::vector<double> out(traj.num_times());
      for (std::size_t t = 0; t < out.size(); ++t) out[t] = count(traj, t, s, voxels);
      return out;
    };
  } else if (name == "constant") {
    if (parts.size() != 2) bad(spec, "expected constant:<c1>[,<c2>...]");
    std::vector<double> values;
    for (const auto& v : split(parts[1], ',')) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || ptr != v.data() + v.size()) bad(spec, "'" + v + "' is not a number");
      values.push_back(x);
    }
    p.arity = values.size();
    p.fn = [values](const Trajectory&) { return values; };
  } else if (name == "polarization_stats") {
    if (parts.size() > 2) bad(spec, "expected polarization_stats[:<species>]");
    const auto s = species_arg(spec, model, parts.size() == 2 ? parts[1] : "Cdc42_m");
    if (!model.mesh || !model.subdomains) bad(spec, "model has no mesh");
    std::shared_ptr<const PolarizationCaps> caps;
    try {
      caps = std::make_shared<const PolarizationCaps>(build_polarization_caps(*model.mesh, *model.subdomains));
    } catch (const MetricError& e) {
      bad(spec, e.what());
    }
    p.arity = 3 + t_count;
    p.fn = [s, caps](const Trajectory& traj) {
      const auto series = polarization_series(traj, *caps, s);
      std::vector<double> out{series.window_mean, series.window_std, series.window_membrane_mean};
      for (auto m : series.membrane_count) out.push_back(static_cast<double>(m));
      return out;
    };
  } else {
    bad(spec, "unknown post-processor; registered: final_count, count_at, timeseries_total, constant, "
              "polarization_stats");
  }
  return p;
}

}  // namespace rdfleet
