#pragma once

#include <iosfwd>

#include "sparsescale/core/types.hpp"

namespace sparsescale {

/// CSV with header `segment_index,active_params,tokens`, one row per segment.
void write_trajectory_csv(std::ostream& out, const ParamTrajectory& traj);

/// Reads the format written by write_trajectory_csv. Every parameter is treated
/// as prunable (the CSV carries no shape information).
ParamTrajectory read_trajectory_csv(std::istream& in);

}  // namespace sparsescale
