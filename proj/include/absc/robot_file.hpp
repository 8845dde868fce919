#pragma once

#include "absc/kinematics.hpp"

#include <string>

namespace absc {

/// Robot description (JSON):
///   {"name": ..., "base_m": [x,y,z],
///    "joints": [{"name", "axis": [..], "origin_m": [..]}, ...],
///    "control_points": [{"name", "link": <joint index>, "offset_m": [..]}, ...],
///    "frozen": [{"joint": <index>, "angle_rad": <value>}, ...],
///    "ee_point": <control point name>}
/// Syntax errors report line and column; semantic errors report the field path.
KinematicChain parse_robot(const std::string& text, const std::string& source = "<robot>");
KinematicChain load_robot(const std::string& path);

}  // namespace absc
