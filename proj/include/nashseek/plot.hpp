#pragma once

// Static SVG plots of a trajectory log: agent paths in the plane and the time
// response of every coordinate.

#include "nashseek/experiment.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nashseek {

/// Agent paths in the x1-x2 plane, sources as circles, equilibrium as crosses.
/// Throws std::invalid_argument unless every agent is 2-D.
void write_phase_svg(const TrajectoryLog& log, std::ostream& out);

/// Every coordinate against t, with dashed lines at the equilibrium values.
void write_time_svg(const TrajectoryLog& log, std::ostream& out);

/// Writes phase.svg (when agents are planar) and time.svg into out_dir and
/// returns the written paths. Skipped plots are reported through notices.
std::vector<std::string> emit_plots(const TrajectoryLog& log, const std::string& out_dir,
                                    std::vector<std::string>* notices = nullptr);

}  // namespace nashseek
