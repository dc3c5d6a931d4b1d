#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"
#include "roverplan/rover/grid_world.hpp"

namespace roverplan::rover {

/// A compiled grid world: the tabular MDP plus its state bijection.
struct FlatMdp {
    mdp::TabularMdp mdp;
    StateIndexer index;
};

/// Compiles every enumerated rover state (in StateIndexer order) plus the
/// absorbing sink into a TabularMdp. Goal-cell states and the sink are terminal.
FlatMdp enumerate(const RoverGridWorld& env);

/// Convenience overload that validates and compiles a configuration.
FlatMdp enumerate(const GridConfig& cfg);

/// Number of flat states (including the sink) `cfg` would enumerate.
std::size_t flat_state_count(const GridConfig& cfg);

} // namespace roverplan::rover
