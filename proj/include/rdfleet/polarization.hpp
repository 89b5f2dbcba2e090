#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rdfleet/error.hpp"
#include "rdfleet/model.hpp"
#include "rdfleet/trajectory.hpp"

namespace rdfleet {

/// The polarization metric cannot be evaluated (e.g. the model has no membrane).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Candidate regions for the polarization metric, one per membrane voxel.
///
/// Cap c is grown from membrane voxel c by adding membrane voxels in order of
/// angular distance from its center (ties by voxel index) until the cap holds at
/// least `area_fraction` of the membrane area. Voxel volume stands in for area: every
/// membrane voxel has the same radial thickness, so volume is proportional to area.
struct PolarizationCaps {
  std::vector<std::uint32_t> membrane;  ///< membrane voxel ids
  std::vector<std::vector<std::uint32_t>> caps;  ///< voxel ids per cap
  std::vector<double> cap_area_fraction;  ///< achieved area fraction per cap
  double target_fraction = 0.1;

  double mean_cap_fraction() const;
};

PolarizationCaps build_polarization_caps(const Mesh& mesh, const SubdomainMap& subdomains,
                                         double area_fraction = 0.1, int membrane_label = kMembraneLabel);

/// Largest percentage of membrane-bound molecules of `species` found in any cap.
/// Returns 0 when no molecules are on the membrane.
double polarization_percent(const PolarizationCaps& caps, std::span<const std::int64_t> snapshot,
                            std::size_t num_species, std::size_t species);
double polarization_percent(const Trajectory& traj, const ModelSpec& model, std::size_t t_index,
                            std::string_view species = "Cdc42_m");

/// Percent and membrane count per output time, plus the time average and standard
/// deviation of the percent over the final `window_fraction` of the output times.
struct PolarizationSeries {
  std::vector<double> t;
  std::vector<double> percent;
  std::vector<std::int64_t> membrane_count;
  double window_mean = 0.0;
  double window_std = 0.0;
  double window_membrane_mean = 0.0;
  std::size_t window_start = 0;
};

inline constexpr double kEquilibrationWindow = 0.5;

PolarizationSeries polarization_series(const Trajectory& traj, const PolarizationCaps& caps, std::size_t species,
                                       double window_fraction = kEquilibrationWindow);

}  // namespace rdfleet
