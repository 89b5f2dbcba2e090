#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rdfleet/model.hpp"
#include "rdfleet/trajectory.hpp"

namespace rdfleet {

/// A named, pure reduction g(X) of one trajectory to a fixed-length vector.
struct PostProcessor {
  std::string spec;   ///< the string it was built from, e.g. "final_count:A"
  std::size_t arity = 0;
  std::function<std::vector<double>(const Trajectory&)> fn;

  std::vector<double> operator()(const Trajectory& traj) const;  ///< checks arity
};

/// Build a registered post-processor from `name[:arg[:arg...]]`:
///
///   final_count:<species>[:<label>]         count at the last output time
///   count_at:<species>:<t_index>[:<label>]  count at one output time
///   timeseries_total:<species>[:<label>]    count at every output time
///   constant:<c1>[,<c2>...]                 fixed values (testing aid)
///   polarization_stats[:<species>]          [window mean %, window std %,
///                                            window mean membrane count,
///                                            membrane count at each output time]
///
/// Without a label, counts cover the whole domain. Throws PostProcessorError for
/// unknown names or arguments that do not resolve against `model`.
PostProcessor make_postprocessor(const std::string& spec, const ModelSpec& model);

/// Names accepted by make_postprocessor.
std::vector<std::string> registered_postprocessors();

}  // namespace rdfleet
