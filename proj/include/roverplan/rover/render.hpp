#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"
#include "roverplan/rover/grid_world.hpp"

#include <string>
#include <vector>

namespace roverplan::rover {

inline constexpr int kSvgCellSize = 40;

/// Cells visited by a flat-MDP trace: the start state, then one cell per
/// step. The end-of-episode sink repeats the previous cell. Throws
/// ContractViolation when a state does not decode.
std::vector<Cell> trace_cells(const RoverGridWorld& env, const mdp::Trace& trace);

/// Text grid (north up) with targets (digits, H for hibernation), obstacles
/// (#), shadows at `shadow_time` (~) and the path (*), followed by one line per
/// step.
std::string render_ascii(const RoverGridWorld& env, const mdp::Trace& trace, int shadow_time = 0);

/// SVG document with one `<line class="step">` per trace step. Byte-identical
/// for identical input.
std::string render_svg(const RoverGridWorld& env, const mdp::Trace& trace, int shadow_time = 0);

} // namespace roverplan::rover
