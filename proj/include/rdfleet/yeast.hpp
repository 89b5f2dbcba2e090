#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdfleet/ensemble.hpp"
#include "rdfleet/model.hpp"

namespace rdfleet {

/// Rates of the Cdc42 polarization model:
///   Cdc42_c -> Cdc42_m            k_on   (membrane)
///   Cdc42_m -> Cdc42_c            k_off  (membrane)
///   Cdc42_c + Cdc42_m -> 2 Cdc42_m k_fb  (membrane)
struct YeastParams {
  double k_on = 0.0;
  double k_off = 0.0;
  double k_fb = 0.0;
  double d_cyt = 0.0;
  double d_mem = 0.0;

  /// Recalibrated values for a unit sphere, chosen so the switch sits near N = 500
  /// (see docs/yeast-calibration.md).
  static YeastParams calibrated();
};

struct YeastGeometry {
  double radius = 1.0;
  int mesh_subdiv = 2;
  int interior_layers = 2;
  double t_end = 200.0;
  std::size_t n_out = 101;
};

/// Mean-field onset of positive feedback: the total count above which recruitment
/// k_fb * N_c / V outpaces k_off. Ignores k_on, which only seeds the membrane.
double yeast_threshold(const YeastParams& params, double volume);

/// Sphere-shell model with Cdc42_m confined to the membrane. Initially 10% of the
/// molecules (rounded to nearest) are scattered on the membrane, the rest in the cytosol.
ModelSpec build_yeast_model(std::uint64_t n_total, const YeastParams& params, const YeastGeometry& geometry = {});

struct SwitchPoint {
  std::uint64_t n_total = 0;
  bool ok = false;
  std::string error;
  double polarization_mean = 0.0;      ///< ensemble mean of the time-averaged max polarization, percent
  double polarization_ci95 = 0.0;
  double polarization_std_mean = 0.0;  ///< ensemble mean of the within-window standard deviation
  double membrane_mean = 0.0;          ///< ensemble mean of the window-averaged membrane count
  std::vector<double> t;
  std::vector<double> membrane_series;  ///< ensemble mean membrane count per output time
};

struct SwitchSweepOptions {
  YeastGeometry geometry;
  std::uint64_t base_seed = 2015;
  EnsembleOptions ensemble;
};

/// One no-storage ensemble per N, reduced with the polarization_stats post-processor.
std::vector<SwitchPoint> run_switch_sweep(const std::vector<std::uint64_t>& n_values, const YeastParams& params,
                                          std::uint64_t ensemble_size, const SwitchSweepOptions& options);

/// `N,polarization_mean,polarization_ci95,polarization_std_mean,membrane_mean,ok`
void write_switch_csv(std::ostream& out, const std::vector<SwitchPoint>& points);
std::string switch_to_json(const std::vector<SwitchPoint>& points, const YeastParams& params, int indent = 2);

}  // namespace rdfleet
