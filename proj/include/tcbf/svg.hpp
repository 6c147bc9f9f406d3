#pragma once

#include <string>

#include "tcbf/sim.hpp"

namespace tcbf::io {

/// Top (x-y) and side (x-z) projections of the flown path with obstacle
/// sections, the planned waypoints and the tracked reference.
void write_path_svg(const sim::TrajectoryLog& log, const sim::Scenario& sc,
                    const std::string& path);

/// Per-obstacle transferred-barrier curves over time plus their dashed
/// pointwise minimum.
void write_barrier_svg(const sim::TrajectoryLog& log, const std::string& path);

/// True and inflated clearance curves over time.
void write_clearance_svg(const sim::TrajectoryLog& log, const sim::Scenario& sc,
                         const std::string& path);

}  // namespace tcbf::io
