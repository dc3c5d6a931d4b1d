#pragma once

#include "roverplan/bilevel/heuristic.hpp"
#include "roverplan/bilevel/state_split.hpp"
#include "roverplan/mdp/tabular_mdp.hpp"

#include <functional>

namespace roverplan::bilevel {

/// Supplies the exact-mode transition for (state, mission slot).
using TransitionOracle = std::function<HeuristicOutcome(const RoverState&, std::size_t slot)>;

/// Target-selection MDP over the flat state enumeration (plus the sink).
/// Action k pursues mission.targets[k]. States are terminal when the flat
/// state is terminal, every science target is done, or no mission target is
/// feasible. Pursuing a done or infeasible target is a zero-reward self-loop.
mdp::TabularMdp build_high_level(const rover::RoverGridWorld& env, const MissionSpec& mission,
                                 const TransitionOracle& transition);

/// Coarse-heuristic convenience overload.
mdp::TabularMdp build_high_level(const rover::RoverGridWorld& env, const MissionSpec& mission,
                                 const HeuristicSpec& spec);

} // namespace roverplan::bilevel
