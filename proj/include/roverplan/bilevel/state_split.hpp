#pragma once

#include "roverplan/rover/grid_world.hpp"

#include <cstdint>
#include <vector>

namespace roverplan::bilevel {

using mdp::ActionIndex;
using mdp::StateIndex;
using rover::RoverState;
using rover::TargetId;

/// Instantaneous part of a rover state.
struct Telemetry {
    int x = 1;
    int y = 1;
    int t = 0;
    friend bool operator==(const Telemetry&, const Telemetry&) = default;
};

/// Exploration-history part of a rover state.
struct TrackingFlags {
    std::uint32_t measured = 0;
    std::uint32_t drilled = 0;
    std::uint32_t visited = 0;
    friend bool operator==(const TrackingFlags&, const TrackingFlags&) = default;
};

Telemetry telemetry_of(const RoverState& s);
TrackingFlags tracking_of(const RoverState& s);
RoverState merge(const Telemetry& telemetry, const TrackingFlags& tracking);

/// Low-level view of a rover state for one focal target: telemetry plus,
/// in full mode, whether the focal target has been measured.
struct LowLevelState {
    Telemetry telemetry;
    bool measured_current = false;
    friend bool operator==(const LowLevelState&, const LowLevelState&) = default;
};

/// Flags raised while a low-level policy ran.
using FlagEvents = TrackingFlags;

/// Drops tracking; keeps only the focal target's measured bit.
LowLevelState subset_of(const RoverState& s, TargetId focal);

/// Lifts a finished low-level run back to a full state: telemetry from the
/// low-level state, tracking from `base` plus the raised flags.
RoverState update_hl_state(const RoverState& base, const LowLevelState& final_state,
                           TargetId focal, const FlagEvents& events);

/// Targets the planner chooses between; ids refer to GridConfig::targets.
struct MissionSpec {
    std::vector<TargetId> targets;

    /// Every configured target, in id order.
    static MissionSpec all_targets(const rover::GridConfig& cfg);
    /// Throws ConfigError for an empty list or unknown ids.
    void validate(const rover::GridConfig& cfg) const;
};

} // namespace roverplan::bilevel
