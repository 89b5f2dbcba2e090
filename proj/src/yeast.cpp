#include "rdfleet/yeast.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "rdfleet/model_io.hpp"
#include "rdfleet/sweep.hpp"

namespace rdfleet {

YeastParams YeastParams::calibrated() {
  YeastParams p;
  p.k_off = 1.0;
  p.k_on = 1e-4;
  p.k_fb = p.k_off * (4.0 / 3.0 * std::numbers::pi) / 500.0;
  p.d_cyt = 1.0;
  p.d_mem = 5e-3;
  return p;
}

double yeast_threshold(const YeastParams& params, double volume) {
  return params.k_fb > 0.0 ? params.k_off * volume / params.k_fb : std::numeric_limits<double>::infinity();
}

ModelSpec build_yeast_model(std::uint64_t n_total, const YeastParams& params, const YeastGeometry& geometry) {
  for (double v : {params.k_on, params.k_off, params.k_fb, params.d_cyt, params.d_mem}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError("yeast model rates must be finite and nonnegative");
  }
  ModelSpec m;
  m.name = "yeast_polarization";
  m.mesh_source = SphereSource{geometry.radius, geometry.mesh_subdiv, geometry.interior_layers};
  m.species = {
      {"Cdc42_c", params.d_cyt, {kCytosolLabel, kMembraneLabel}},
      {"Cdc42_m", params.d_mem, {kMembraneLabel}},
  };
  m.parameters = {{"k_on", params.k_on}, {"k_off", params.k_off}, {"k_fb", params.k_fb}};
  m.reactions = {
      {"on", {{"Cdc42_c", 1}}, {{"Cdc42_m", 1}}, MassAction{"k_on"}, {kMembraneLabel}},
      {"off", {{"Cdc42_m", 1}}, {{"Cdc42_c", 1}}, MassAction{"k_off"}, {kMembraneLabel}},
      {"feedback", {{"Cdc42_c", 1}, {"Cdc42_m", 1}}, {{"Cdc42_m", 2}}, MassAction{"k_fb"}, {kMembraneLabel}},
  };
  const auto on_membrane = static_cast<std::uint64_t>(std::llround(0.1 * static_cast<double>(n_total)));
  m.initial = {
      ScatterDirective{"Cdc42_m", on_membrane, kMembraneLabel},
      ScatterDirective{"Cdc42_c", n_total - on_membrane, kCytosolLabel},
  };
  const Linspace ls{0.0, geometry.t_end, geometry.n_out};
  m.tspan = ls.values();
  m.tspan_linspace = ls;
  m.attach_mesh();
  return m;
}

std::vector<SwitchPoint> run_switch_sweep(const std::vector<std::uint64_t>& n_values, const YeastParams& params,
                                          std::uint64_t ensemble_size, const SwitchSweepOptions& options) {
  SweepSpec sweep;
  SweepAxis axis{"N", {}};
  for (auto n : n_values) axis.values.push_back(static_cast<double>(n));
  sweep.axes = {axis};
  sweep.ensemble_size = ensemble_size;
  sweep.postprocessor = "polarization_stats:Cdc42_m";
  sweep.base_seed = options.base_seed;
  sweep.id = "yeast-switch";

  const auto rows = run_parameter_sweep(
      [&](const ParamPoint& point) {
        return build_yeast_model(static_cast<std::uint64_t>(point.front().second), params, options.geometry);
      },
      sweep, options.ensemble, StorageMode::None);

  const auto times = Linspace{0.0, options.geometry.t_end, options.geometry.n_out}.values();
  std::vector<SwitchPoint> out;
  for (const auto& row : rows) {
    SwitchPoint sp;
    sp.n_total = static_cast<std::uint64_t>(row.point.front().second);
    sp.ok = row.summary.has_value();
    sp.error = row.error;
    sp.t = times;
    if (row.summary) {
      const auto& s = *row.summary;
      sp.polarization_mean = s.mean[0];
      sp.polarization_ci95 = s.ci95[0];
      sp.polarization_std_mean = s.mean[1];
      sp.membrane_mean = s.mean[2];
      sp.membrane_series.assign(s.mean.begin() + 3, s.mean.end());
    }
    out.push_back(std::move(sp));
  }
  return out;
}

void write_switch_csv(std::ostream& out, const std::vector<SwitchPoint>& points) {
  out << "N,polarization_mean,polarization_ci95,polarization_std_mean,membrane_mean,ok\n";
  for (const auto& p : points) {
    out << p.n_total << ',' << format_double(p.polarization_mean) << ',' << format_double(p.polarization_ci95) << ','
        << format_double(p.polarization_std_mean) << ',' << format_double(p.membrane_mean) << ','
        << (p.ok ? 1 : 0) << '\n';
  }
}

std::string switch_to_json(const std::vector<SwitchPoint>& points, const YeastParams& params, int indent) {
  nlohmann::json j;
  j["params"] = {{"k_on", params.k_on},   {"k_off", params.k_off}, {"k_fb", params.k_fb},
                 {"D_cyt", params.d_cyt}, {"D_mem", params.d_mem}};
  j["points"] = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json r;
    r["N"] = p.n_total;
    r["ok"] = p.ok;
    if (!p.error.empty()) r["error"] = p.error;
    r["polarization_mean"] = p.polarization_mean;
    r["polarization_ci95"] = p.polarization_ci95;
    r["polarization_std_mean"] = p.polarization_std_mean;
    r["membrane_mean"] = p.membrane_mean;
    r["t"] = p.t;
    r["membrane_series"] = p.membrane_series;
    j["points"].push_back(std::move(r));
  }
  return j.dump(indent);
}

}  // namespace rdfleet
